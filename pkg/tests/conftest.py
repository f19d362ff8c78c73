"""Shared fixtures and helpers."""
import pytest

from driftlab.data import TimeSeries, synth_regime_series


def series_from(closes, symbol="T"):
    """Build a minimal valid TimeSeries from a list of closes."""
    dates = []
    for i in range(len(closes)):
        month, day = 1 + i // 28, 1 + i % 28
        year = 2020 + month // 13
        month = month if month <= 12 else month - 12
        dates.append(f"{year:04d}-{month:02d}-{day:02d}")
    return TimeSeries(symbol=symbol, dates=tuple(dates), closes=tuple(float(c) for c in closes))


@pytest.fixture(scope="session")
def regime_series():
    """A 1250-point series with four labeled regime changes: calm uptrends
    broken by volatile corrections.  Shared by harness/experiment tests."""
    return synth_regime_series(
        [
            (300, 0.001, 0.004),
            (200, -0.002, 0.025),
            (300, 0.0015, 0.005),
            (200, 0.001, 0.02),
            (250, 0.0, 0.005),
        ],
        seed=42,
    )


@pytest.fixture(scope="session")
def short_series():
    """A 160-point low-volatility series for fast harness tests."""
    return synth_regime_series([(160, 0.001, 0.01)], seed=5)
