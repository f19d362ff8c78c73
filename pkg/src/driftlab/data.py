"""Time-series containers, CSV ingest and synthetic regime generation.

The package works on daily closing prices.  A :class:`TimeSeries` is an
immutable (dates, closes) pair; supervised learning consumes it as a list of
:class:`Instance` rows, each pairing the three previous closes with the close
to predict.
"""
from __future__ import annotations

import csv
import datetime as _dt
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

#: Minimum number of usable rows a series must have before any learning can
#: happen: 3 lags + 30 training instances + 1 instance to predict.
MIN_SERIES_LENGTH = 34

#: Number of lagged closes used as features.
N_LAGS = 3


class DataError(ValueError):
    """Raised when an input series or file violates the data contract."""


@dataclass(frozen=True)
class TimeSeries:
    """An ordered series of positive daily closes.

    Attributes
    ----------
    symbol:
        Ticker or synthetic identifier, informational only.
    dates:
        ISO ``YYYY-MM-DD`` strings, strictly increasing.
    closes:
        Positive closing prices, one per date.
    skipped_rows:
        Number of source rows dropped during ingest (null price cells).
    change_points:
        For synthetic series: indices where a new regime segment starts
        (never includes 0).  ``None`` for real data.
    segment_ids:
        For synthetic series: per-index segment number (0-based).
        ``None`` for real data.
    """

    symbol: str
    dates: tuple[str, ...]
    closes: tuple[float, ...]
    skipped_rows: int = 0
    change_points: tuple[int, ...] | None = None
    segment_ids: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.dates) != len(self.closes):
            raise DataError(
                f"dates and closes differ in length: {len(self.dates)} != {len(self.closes)}"
            )
        for i, c in enumerate(self.closes):
            if not math.isfinite(c) or c <= 0.0:
                raise DataError(f"non-positive close {c!r} at index {i}")
        for i in range(1, len(self.dates)):
            if self.dates[i] <= self.dates[i - 1]:
                raise DataError(
                    f"dates must be strictly increasing: {self.dates[i - 1]!r} followed by "
                    f"{self.dates[i]!r} at index {i}"
                )

    def __len__(self) -> int:
        return len(self.closes)


@dataclass(frozen=True)
class Instance:
    """One supervised row: three lagged closes and the close they predict.

    ``features == (closes[t-3], closes[t-2], closes[t-1])`` and
    ``target == closes[t]`` for the source series position ``t``.
    """

    features: tuple[float, float, float]
    target: float
    t: int


def make_instances(ts: TimeSeries) -> list[Instance]:
    """Unroll a series into supervised instances, one per position ``t >= 3``."""
    closes = ts.closes
    return [
        Instance(features=(closes[t - 3], closes[t - 2], closes[t - 1]), target=closes[t], t=t)
        for t in range(N_LAGS, len(closes))
    ]


def load_csv(path: str, column: str = "Close") -> TimeSeries:
    """Load a daily price series from a CSV file with a ``Date`` column.

    Rows whose price cell is empty or the literal ``null`` are skipped and
    counted (``TimeSeries.skipped_rows``); a warning with the count is logged.

    Raises
    ------
    DataError
        If the file is missing, the requested column (or ``Date``) is absent,
        fewer than ``MIN_SERIES_LENGTH`` usable rows remain, a price is
        non-positive/unparseable, or dates are not strictly increasing.
        Row-level errors name the offending 1-based source row.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path!r}: {exc}") from exc

    dates: list[str] = []
    closes: list[float] = []
    skipped = 0
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path!r} is empty") from None
        header = [h.strip() for h in header]
        if "Date" not in header:
            raise DataError(f"{path!r} has no 'Date' column (header: {header})")
        if column not in header:
            raise DataError(f"{path!r} has no {column!r} column (header: {header})")
        date_idx = header.index("Date")
        close_idx = header.index(column)

        for rownum, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            raw = row[close_idx].strip() if close_idx < len(row) else ""
            if raw == "" or raw.lower() == "null":
                skipped += 1
                continue
            try:
                price = float(raw)
            except ValueError:
                raise DataError(f"{path!r} row {rownum}: unparseable {column!r} value {raw!r}") from None
            if not math.isfinite(price) or price <= 0.0:
                raise DataError(f"{path!r} row {rownum}: non-positive price {price!r}")
            date = row[date_idx].strip()
            if dates and date <= dates[-1]:
                raise DataError(
                    f"{path!r} row {rownum}: date {date!r} not after previous {dates[-1]!r}"
                )
            dates.append(date)
            closes.append(price)

    if skipped:
        logger.warning("%s: skipped %d row(s) with null %s cells", path, skipped, column)
    if len(closes) < MIN_SERIES_LENGTH:
        raise DataError(
            f"{path!r} has only {len(closes)} usable rows; need at least {MIN_SERIES_LENGTH}"
        )
    symbol = path.rsplit("/", 1)[-1]
    if symbol.lower().endswith(".csv"):
        symbol = symbol[:-4]
    return TimeSeries(
        symbol=symbol,
        dates=tuple(dates),
        closes=tuple(closes),
        skipped_rows=skipped,
    )


def save_csv(ts: TimeSeries, path: str, column: str = "Close") -> None:
    """Write a series as ``Date,<column>`` CSV; floats round-trip exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Date", column])
        for date, close in zip(ts.dates, ts.closes):
            writer.writerow([date, repr(close)])


def save_segments_csv(ts: TimeSeries, path: str) -> None:
    """Write the per-index segment labels of a synthetic series as CSV."""
    if ts.segment_ids is None:
        raise DataError("series has no segment metadata")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Index", "Segment"])
        for i, seg in enumerate(ts.segment_ids):
            writer.writerow([i, seg])


#: Upper bound on per-step volatility for synthetic regimes; beyond this the
#: geometric walk can step to a non-positive price.
MAX_SYNTH_VOL = 0.3

_SYNTH_START_PRICE = 100.0
_SYNTH_START_DATE = _dt.date(2016, 1, 4)


@dataclass(frozen=True)
class SegmentSpec:
    """One synthetic regime: ``length`` points with fixed drift and volatility."""

    length: int
    drift: float
    vol: float

    def __post_init__(self) -> None:
        if self.length < 1:
            raise DataError(f"segment length must be >= 1, got {self.length}")
        if not math.isfinite(self.drift):
            raise DataError(f"non-finite segment drift {self.drift!r}")
        if not (0.0 <= self.vol <= MAX_SYNTH_VOL):
            raise DataError(
                f"segment vol must be in [0, {MAX_SYNTH_VOL}], got {self.vol!r}"
            )


def synth_regime_series(
    segments: Sequence[SegmentSpec | tuple[int, float, float]],
    seed: int,
    symbol: str = "SYNTH",
) -> TimeSeries:
    """Generate a piecewise geometric random walk with labeled regime changes.

    The series starts at 100.0 (index 0 belongs to the first segment) and each
    subsequent close is ``prev * (1 + drift + vol * z)`` with ``z`` standard
    normal from a generator seeded by ``seed``; a segment's drift/vol govern
    every step *into* that segment.  Identical ``(segments, seed)`` yield an
    identical series.

    Returns a series carrying ``change_points`` (first index of each segment
    after the first) and per-index ``segment_ids``.
    """
    specs = [s if isinstance(s, SegmentSpec) else SegmentSpec(*s) for s in segments]
    if not specs:
        raise DataError("need at least one segment")
    rng = np.random.default_rng(seed)

    closes: list[float] = []
    segment_ids: list[int] = []
    change_points: list[int] = []
    for seg_no, spec in enumerate(specs):
        if seg_no > 0:
            change_points.append(len(closes))
        for _ in range(spec.length):
            if not closes:
                closes.append(_SYNTH_START_PRICE)
            else:
                z = float(rng.standard_normal())
                nxt = closes[-1] * (1.0 + spec.drift + spec.vol * z)
                if nxt <= 0.0:
                    raise DataError(
                        f"synthetic walk hit non-positive price at index {len(closes)}"
                    )
                closes.append(nxt)
            segment_ids.append(seg_no)

    dates = tuple(
        (_SYNTH_START_DATE + _dt.timedelta(days=i)).isoformat() for i in range(len(closes))
    )
    return TimeSeries(
        symbol=symbol,
        dates=dates,
        closes=tuple(closes),
        change_points=tuple(change_points),
        segment_ids=tuple(segment_ids),
    )
