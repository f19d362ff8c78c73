"""Prediction-error metrics and the average-change error-bound report.

Two MAPE variants drive the whole evaluation:

- ``mape_apd`` — mean absolute percentage error over *all* predicted data
  points of a run, the number reported in result tables;
- ``mape_last_k`` — the same error over the last ``k`` (default 60)
  predictions of the *current model's* segment, the signal optionally fed to
  drift detectors.

``error_bounds`` builds the average-relative-change envelope around a naive
next-step forecast: from per-step relative moves it derives two anchor
predictions (move in the realized direction vs against it, both of
average-so-far magnitude) and reports their mean errors in two conventions.
The *literal* convention measures both anchors against the previous close,
which collapses lower and upper to the same number — kept deliberately, and
flagged, because downstream consumers compare against it; the *corrected*
convention measures against the realized close and yields a genuine
``lower <= upper`` interval.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence

from .data import TimeSeries

DEFAULT_LAST_K = 60


@dataclass
class PredictionLog:
    """Append-only record of (t, predicted, actual) triples for one run.

    ``global`` spans the whole run; ``current_segment`` only the predictions
    made since the last (re)fit — it grows until :meth:`reset_segment` is
    called at a fit event.
    """

    times: list[int] = field(default_factory=list)
    predicted: list[float] = field(default_factory=list)
    actual: list[float] = field(default_factory=list)
    _segment_start: int = 0

    def append(self, t: int, predicted: float, actual: float) -> None:
        if actual <= 0.0:
            raise ValueError(f"actual must be positive, got {actual!r} at t={t}")
        if self.times and t <= self.times[-1]:
            raise ValueError(f"time {t} not after previous {self.times[-1]}")
        self.times.append(t)
        self.predicted.append(predicted)
        self.actual.append(actual)

    def reset_segment(self) -> None:
        """Start a new segment (called exactly when a model is fit)."""
        self._segment_start = len(self.times)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def segment_length(self) -> int:
        return len(self.times) - self._segment_start

    def global_pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.predicted, self.actual))

    def segment_pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.predicted[self._segment_start:], self.actual[self._segment_start:]))


def mape(pairs: Sequence[tuple[float, float]]) -> float:
    """Mean of ``|predicted - actual| / actual`` over (predicted, actual) pairs."""
    if not pairs:
        raise ValueError("mape of an empty sequence is undefined")
    total = 0.0
    for predicted, actual in pairs:
        if actual == 0.0:
            raise ValueError("mape undefined for zero actual value")
        total += abs(predicted - actual) / actual
    return total / len(pairs)


def mape_apd(log: PredictionLog, t: int | None = None) -> float:
    """MAPE over all globally logged predictions with time <= ``t``.

    Segment resets never affect this value; with ``t`` at (or past) the final
    step it is the run-level error reported in result tables.
    """
    if t is None or (log.times and t >= log.times[-1]):
        end = len(log.times)
    else:
        end = bisect.bisect_right(log.times, t)
    if end == 0:
        raise ValueError(f"no predictions at or before t={t}")
    total = 0.0
    for i in range(end):
        total += abs(log.predicted[i] - log.actual[i]) / log.actual[i]
    return total / end


def mape_last_k(log: PredictionLog, t: int | None = None, k: int = DEFAULT_LAST_K) -> float:
    """MAPE over the last ``min(k, segment length)`` predictions of the
    current segment (the whole segment when it is shorter than ``k``)."""
    start = log._segment_start
    if t is None or (log.times and t >= log.times[-1]):
        end = len(log.times)
    else:
        end = bisect.bisect_right(log.times, t)
    if end <= start:
        raise ValueError("current segment has no predictions in range")
    lo = max(start, end - k)
    total = 0.0
    for i in range(lo, end):
        total += abs(log.predicted[i] - log.actual[i]) / log.actual[i]
    return total / (end - lo)


@dataclass(frozen=True)
class BoundsReport:
    """Average-relative-change error bounds over a close range.

    Sequences are per in-range step ``t``; the four bound scalars are means
    over the range.  ``lower_literal == upper_literal`` by construction (the
    literal convention divides by the previous close); the corrected pair
    satisfies ``lower_corrected <= upper_corrected``.
    """

    t_range: tuple[int, int]
    diff: tuple[float, ...]
    abs_perc: tuple[float, ...]
    avg_abs_perc_error: tuple[float, ...]
    correct_sign: tuple[int, ...]
    d_hat_correct: tuple[float, ...]
    d_hat_wrong: tuple[float, ...]
    lower_literal: float
    upper_literal: float
    lower_corrected: float
    upper_corrected: float
    learner_ape: float


def abs_perc_steps(ts: TimeSeries, t0: int, t1: int) -> list[float]:
    """Per-step relative moves ``|d_t - d_{t-1}| / d_{t-1}`` for t in [t0, t1]."""
    closes = ts.closes
    return [abs(closes[t] - closes[t - 1]) / closes[t - 1] for t in range(t0, t1 + 1)]


def error_bounds(
    ts: TimeSeries,
    learner_ape: float = 0.0,
    t_range: tuple[int, int] | None = None,
) -> BoundsReport:
    """Build the :class:`BoundsReport` for closes in ``t_range`` (default: all).

    For each step the realized move defines a direction; two anchor
    predictions displace the previous close by the running mean relative move
    in that direction (``d_hat_correct``) and against it (``d_hat_wrong``).
    Literal bounds average ``|d_hat - d_{t-1}| / d_{t-1}`` (both equal the
    mean running average by algebra); corrected bounds average
    ``|d_hat - d_t| / d_t``.
    """
    if t_range is None:
        t_range = (1, len(ts.closes) - 1)
    t0, t1 = t_range
    if not 1 <= t0 <= t1 <= len(ts.closes) - 1:
        raise ValueError(
            f"invalid bounds range {t_range!r} for series of length {len(ts.closes)}"
        )

    closes = ts.closes
    diff: list[float] = []
    abs_perc: list[float] = []
    avg_abs: list[float] = []
    sign: list[int] = []
    d_correct: list[float] = []
    d_wrong: list[float] = []
    lit_lo_sum = lit_hi_sum = 0.0
    cor_lo_sum = cor_hi_sum = 0.0
    running = 0.0
    for i, t in enumerate(range(t0, t1 + 1), start=1):
        prev, cur = closes[t - 1], closes[t]
        d = cur - prev
        ap = abs(d / prev)
        running += ap
        avg = running / i
        s = 1 if d >= 0.0 else -1
        dc = prev * (1.0 + s * avg)
        dw = prev * (1.0 - s * avg)
        diff.append(d)
        abs_perc.append(ap)
        avg_abs.append(avg)
        sign.append(s)
        d_correct.append(dc)
        d_wrong.append(dw)
        lit_lo_sum += abs(dc - prev) / prev
        lit_hi_sum += abs(dw - prev) / prev
        cor_lo_sum += abs(dc - cur) / cur
        cor_hi_sum += abs(dw - cur) / cur

    n = len(abs_perc)
    return BoundsReport(
        t_range=(t0, t1),
        diff=tuple(diff),
        abs_perc=tuple(abs_perc),
        avg_abs_perc_error=tuple(avg_abs),
        correct_sign=tuple(sign),
        d_hat_correct=tuple(d_correct),
        d_hat_wrong=tuple(d_wrong),
        lower_literal=lit_lo_sum / n,
        upper_literal=lit_hi_sum / n,
        lower_corrected=cor_lo_sum / n,
        upper_corrected=cor_hi_sum / n,
        learner_ape=learner_ape,
    )
