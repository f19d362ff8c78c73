"""Standard streaming drift detectors.

From-scratch implementations of seven widely used detectors, following the
original publications with the parameter defaults of the common reference
libraries:

- ``AdwinDetector`` — adaptive windowing over an exponential bucket
  histogram (Bifet & Gavalda, 2007).
- ``DdmDetector`` — error-rate control chart (Gama et al., 2004).
- ``EddmDetector`` — distance-between-errors control chart
  (Baena-Garcia et al., 2006).
- ``KswinDetector`` — sliding-window two-sample Kolmogorov-Smirnov test
  (Raab et al., 2020).
- ``PageHinkleyDetector`` — cumulative mean-shift test (Page, 1954).
- ``HddmAverageDetector`` / ``HddmWeightedDetector`` — Hoeffding- and
  McDiarmid-bound tests on segment means / EWMA estimates
  (Frias-Blanco et al., 2015).

All accept arbitrary finite reals.  DDM and EDDM were designed for binary
error streams; fed real values they degrade in a documented way (see each
class) rather than erroring, which matters because the run harness feeds
detectors either raw prices or error rates depending on configuration.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np
from scipy import special as _sp_special

from .base import DriftDetector, Outcome


# ---------------------------------------------------------------------------
# ADWIN
# ---------------------------------------------------------------------------

class _Bucket:
    """Summary of 2^row consecutive values: their sum and M2 (centered SS)."""

    __slots__ = ("total", "variance")

    def __init__(self, total: float = 0.0, variance: float = 0.0) -> None:
        self.total = total
        self.variance = variance


class AdwinDetector(DriftDetector):
    """ADWIN: adaptive sliding window with statistically invalid prefixes cut.

    The window is kept as an exponential histogram: row ``r`` holds at most
    ``MAX_BUCKETS`` buckets each summarizing ``2^r`` values, so memory is
    logarithmic in the window length.  Every ``_CLOCK`` updates the window is
    scanned for a split point where the two sub-window means differ by more
    than a delta-dependent Hoeffding-style bound; if found, the oldest bucket
    is dropped (repeatedly) and the update reports drift.

    Parameters
    ----------
    delta:
        Confidence parameter of the cut test; smaller is more conservative.
    """

    _MAX_BUCKETS = 5
    _CLOCK = 32
    _MIN_WINDOW = 10      # total width required before cut tests run
    _MIN_SUBWINDOW = 5    # each side of a candidate cut must be at least this

    def __init__(self, delta: float = 0.002) -> None:
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {delta!r}")
        self.delta = delta
        self.reset()

    def reset(self) -> None:
        self._rows: list[deque[_Bucket]] = [deque()]
        self.width = 0
        self.total = 0.0
        self.variance = 0.0  # M2: sum of squared deviations from the mean
        self._ticks = 0
        self.n_seen = 0
        self.n_dropped = 0
        self.filling = True

    @property
    def estimation(self) -> float:
        """Mean of the values currently in the window."""
        return self.total / self.width if self.width else 0.0

    # -- histogram maintenance ------------------------------------------------

    def _insert(self, x: float) -> None:
        self._rows[0].appendleft(_Bucket(x, 0.0))
        if self.width > 0:
            mean = self.total / self.width
            self.variance += self.width * (x - mean) ** 2 / (self.width + 1)
        self.width += 1
        self.total += x
        self._compress()

    def _compress(self) -> None:
        row = 0
        while row < len(self._rows) and len(self._rows[row]) > self._MAX_BUCKETS:
            if row + 1 == len(self._rows):
                self._rows.append(deque())
            b2 = self._rows[row].pop()   # oldest
            b1 = self._rows[row].pop()   # second oldest
            n = float(1 << row)
            u1, u2 = b1.total / n, b2.total / n
            cross = n * n * (u1 - u2) ** 2 / (n + n)
            self._rows[row + 1].appendleft(
                _Bucket(b1.total + b2.total, b1.variance + b2.variance + cross)
            )
            row += 1

    def _drop_oldest_bucket(self) -> None:
        last = len(self._rows) - 1
        bucket = self._rows[last][-1]
        n = float(1 << last)
        self.width -= int(n)
        self.total -= bucket.total
        u = bucket.total / n
        if self.width > 0:
            self.variance -= bucket.variance + n * self.width * (
                u - self.total / self.width
            ) ** 2 / (n + self.width)
        else:
            self.variance = 0.0
        self._rows[last].pop()
        if not self._rows[last] and last > 0:
            self._rows.pop()
        self.n_dropped += int(n)

    # -- cut test --------------------------------------------------------------

    def _should_cut(self, n0: float, n1: float, u0: float, u1: float) -> bool:
        n = float(self.width)
        dd = math.log(2.0 * math.log(n) / self.delta)
        v = self.variance / n
        m = 1.0 / (n0 - self._MIN_SUBWINDOW + 1) + 1.0 / (n1 - self._MIN_SUBWINDOW + 1)
        eps = math.sqrt(2.0 * m * v * dd) + 2.0 / 3.0 * dd * m
        return abs(u0 / n0 - u1 / n1) > eps

    def _detect_and_shrink(self) -> bool:
        shrunk = False
        reduced = True
        while reduced:
            reduced = False
            n0, u0 = 0.0, 0.0
            n1, u1 = float(self.width), self.total
            # Walk cut points from the oldest data towards the newest.
            for row in range(len(self._rows) - 1, -1, -1):
                size = float(1 << row)
                for idx in range(len(self._rows[row]) - 1, -1, -1):
                    bucket = self._rows[row][idx]
                    n0 += size
                    u0 += bucket.total
                    n1 -= size
                    u1 -= bucket.total
                    if n1 < self._MIN_SUBWINDOW:
                        break
                    if (
                        n0 >= self._MIN_SUBWINDOW
                        and self._should_cut(n0, n1, u0, u1)
                    ):
                        self._drop_oldest_bucket()
                        shrunk = True
                        reduced = True
                        break
                if reduced:
                    break
        return shrunk

    def _update(self, x: float) -> Outcome:
        self.n_seen += 1
        self._insert(x)
        self._ticks += 1
        self.filling = self.width <= self._MIN_WINDOW
        if self._ticks % self._CLOCK == 0 and self.width > self._MIN_WINDOW:
            if self._detect_and_shrink():
                return Outcome.DRIFT
        return Outcome.NORMAL


# ---------------------------------------------------------------------------
# DDM
# ---------------------------------------------------------------------------

class DdmDetector(DriftDetector):
    """DDM: control chart on a running mean with binomial deviation.

    Tracks the running mean ``p`` of the inputs and its binomial deviation
    ``s = sqrt(p*(1-p)/n)``, remembers the minimum of ``p + s``, and flags
    warning / drift when ``p + s`` exceeds ``p_min + 2*s_min`` /
    ``p_min + 3*s_min``.  Tests start after ``min_instances`` updates.

    Designed for error rates in [0, 1].  While the running mean sits outside
    [0, 1] the binomial variance is negative, so the minimum statistics and
    the tests are suspended (outcome stays ``NORMAL``); the detector is
    therefore inert on raw price streams but fully live on error rates.
    """

    def __init__(
        self,
        min_instances: int = 30,
        warning_level: float = 2.0,
        drift_level: float = 3.0,
    ) -> None:
        self.min_instances = min_instances
        self.warning_level = warning_level
        self.drift_level = drift_level
        self.reset()

    def reset(self) -> None:
        self._n = 1
        self._p = 1.0
        self._s = 0.0
        self._p_min = math.inf
        self._s_min = math.inf
        self._ps_min = math.inf
        self.filling = True

    def _update(self, x: float) -> Outcome:
        self._p += (x - self._p) / float(self._n)
        variance = self._p * (1.0 - self._p) / float(self._n)
        self._n += 1
        self.filling = self._n - 1 < self.min_instances
        if self._n - 1 < self.min_instances:
            return Outcome.NORMAL
        if variance < 0.0:
            return Outcome.NORMAL
        self._s = math.sqrt(variance)
        if self._p + self._s <= self._ps_min:
            self._p_min = self._p
            self._s_min = self._s
            self._ps_min = self._p + self._s
        if self._p + self._s > self._p_min + self.drift_level * self._s_min:
            out = Outcome.DRIFT
            self.reset()
            return out
        if self._p + self._s > self._p_min + self.warning_level * self._s_min:
            return Outcome.WARNING
        return Outcome.NORMAL


# ---------------------------------------------------------------------------
# EDDM
# ---------------------------------------------------------------------------

class EddmDetector(DriftDetector):
    """EDDM: control chart on the distance between consecutive error events.

    The original method watches how many samples pass between classification
    errors: the running mean + 2 std of that distance shrinking below 90%
    (drift) or 95% (warning) of its observed maximum signals change.  Fed
    arbitrary reals, every sample counts as an event, so the inter-event
    distance is constantly 1 and the ratio pins at 1.0 — the detector is
    structurally inert on real-valued streams.  That mismatch is inherited
    deliberately: configurations using it on prices measure exactly the
    published behavior.
    """

    _WARNING_RATIO = 0.95
    _DRIFT_RATIO = 0.9

    def __init__(self, min_instances: int = 30, min_errors: int = 30) -> None:
        self.min_instances = min_instances
        self.min_errors = min_errors
        self.reset()

    def reset(self) -> None:
        self._n = 1
        self._n_errors = 0
        self._last_e = 0
        self._mean = 0.0
        self._m2 = 0.0
        self._m2s_max = 0.0
        self.filling = True

    def _update(self, x: float) -> Outcome:
        self._n += 1
        self.filling = self._n < self.min_instances
        # Every observed sample is an event; record its distance to the last.
        self._n_errors += 1
        distance = (self._n - 1) - self._last_e
        self._last_e = self._n - 1
        old_mean = self._mean
        self._mean += (distance - self._mean) / self._n_errors
        self._m2 += (distance - self._mean) * (distance - old_mean)
        std = math.sqrt(self._m2 / self._n_errors)
        m2s = self._mean + 2.0 * std

        if self._n < self.min_instances:
            return Outcome.NORMAL
        if m2s > self._m2s_max:
            self._m2s_max = m2s
            return Outcome.NORMAL
        if self._m2s_max <= 0.0 or self._n_errors <= self.min_errors:
            return Outcome.NORMAL
        ratio = m2s / self._m2s_max
        if ratio < self._DRIFT_RATIO:
            self.reset()
            return Outcome.DRIFT
        if ratio < self._WARNING_RATIO:
            return Outcome.WARNING
        return Outcome.NORMAL


# ---------------------------------------------------------------------------
# KSWIN
# ---------------------------------------------------------------------------

class KswinDetector(DriftDetector):
    """KSWIN: two-sample Kolmogorov-Smirnov test over a sliding window.

    Keeps the last ``window_size`` values; once full, each update compares
    the newest ``stat_size`` values against ``stat_size`` values sampled
    uniformly (with replacement, from this detector's own seeded generator)
    out of the older remainder.  Drift is flagged when the asymptotic KS
    p-value falls below ``alpha``; the window then shrinks to the newest
    ``stat_size`` values.  ``reset`` reseeds the generator, so replays are
    exactly reproducible.
    """

    def __init__(
        self,
        alpha: float = 0.005,
        window_size: int = 100,
        stat_size: int = 30,
        seed: int | None = None,
    ) -> None:
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {alpha!r}")
        if stat_size >= window_size:
            raise ValueError("stat_size must be smaller than window_size")
        self.alpha = alpha
        self.window_size = window_size
        self.stat_size = stat_size
        self.seed = seed
        self.reset()

    def reset(self) -> None:
        self._rng = np.random.default_rng(self.seed)
        self._window: list[float] = []
        self.p_value = 1.0
        self.filling = True

    @staticmethod
    def _ks_p_value(sample_a: np.ndarray, sample_b: np.ndarray) -> float:
        """Asymptotic two-sample KS p-value (Kolmogorov distribution sf)."""
        a = np.sort(sample_a)
        b = np.sort(sample_b)
        pooled = np.concatenate([a, b])
        cdf_a = np.searchsorted(a, pooled, side="right") / a.size
        cdf_b = np.searchsorted(b, pooled, side="right") / b.size
        d = float(np.max(np.abs(cdf_a - cdf_b)))
        en = math.sqrt(a.size * b.size / (a.size + b.size))
        return float(_sp_special.kolmogorov(en * d))

    def _update(self, x: float) -> Outcome:
        if len(self._window) < self.window_size:
            self._window.append(x)
            self.filling = True
            return Outcome.NORMAL
        self.filling = False
        self._window.pop(0)
        recent = np.asarray(self._window[-self.stat_size:])
        older = np.asarray(self._window[: -self.stat_size])
        sampled = self._rng.choice(older, size=self.stat_size, replace=True)
        self.p_value = self._ks_p_value(sampled, recent)
        if self.p_value < self.alpha:
            self._window = self._window[-self.stat_size:]
            self._window.append(x)
            return Outcome.DRIFT
        self._window.append(x)
        return Outcome.NORMAL


# ---------------------------------------------------------------------------
# Page-Hinkley
# ---------------------------------------------------------------------------

class PageHinkleyDetector(DriftDetector):
    """Page-Hinkley test for an upward shift of the stream mean.

    Accumulates ``sum = max(0, alpha*sum + (x - mean - delta))`` where
    ``mean`` is the running mean; drift is flagged when the accumulator
    exceeds ``threshold`` (after ``min_instances`` updates), upon which the
    detector resets.
    """

    def __init__(
        self,
        min_instances: int = 30,
        delta: float = 0.005,
        threshold: float = 50.0,
        alpha: float = 0.9999,
    ) -> None:
        self.min_instances = min_instances
        self.delta = delta
        self.threshold = threshold
        self.alpha = alpha
        self.reset()

    def reset(self) -> None:
        self._n = 1
        self._mean = 0.0
        self._sum = 0.0
        self.filling = True

    def _update(self, x: float) -> Outcome:
        self._mean += (x - self._mean) / float(self._n)
        self._sum = max(0.0, self.alpha * self._sum + (x - self._mean - self.delta))
        self._n += 1
        self.filling = self._n - 1 < self.min_instances
        if self._n - 1 < self.min_instances:
            return Outcome.NORMAL
        if self._sum > self.threshold:
            self.reset()
            return Outcome.DRIFT
        return Outcome.NORMAL


# ---------------------------------------------------------------------------
# HDDM (Hoeffding bounds on prefix means)
# ---------------------------------------------------------------------------

class HddmAverageDetector(DriftDetector):
    """HDDM_A: Hoeffding-bound comparison of prefix means.

    Maintains the global running sum and the extremal "cut" prefixes (the
    prefix with the lowest upper confidence bound on its mean, and the one
    with the highest lower bound).  A drift is flagged when the mean of the
    data after a cut exceeds (or, two-sided, falls below) the cut's mean by
    more than a Hoeffding bound at ``drift_confidence``; the looser
    ``warning_confidence`` bound yields warnings.  Bounds assume inputs in
    [0, 1]; arbitrary reals are accepted and simply make the test more
    trigger-happy, which is the documented behavior on raw prices.
    """

    def __init__(
        self,
        drift_confidence: float = 0.001,
        warning_confidence: float = 0.005,
        two_sided: bool = True,
    ) -> None:
        self.drift_confidence = drift_confidence
        self.warning_confidence = warning_confidence
        self.two_sided = two_sided
        self.reset()

    def reset(self) -> None:
        self._total_n = 0
        self._total_c = 0.0
        self._n_min = 0
        self._c_min = 0.0
        self._n_max = 0
        self._c_max = 0.0
        self.filling = True

    def _bound(self, n: float, confidence: float) -> float:
        return math.sqrt(1.0 / (2.0 * n) * math.log(1.0 / confidence))

    def _mean_incr(self, confidence: float) -> bool:
        if self._n_min == self._total_n:
            return False
        m = (self._total_n - self._n_min) / self._n_min * (1.0 / self._total_n)
        bound = math.sqrt(m / 2.0 * math.log(2.0 / confidence))
        return self._total_c / self._total_n - self._c_min / self._n_min >= bound

    def _mean_decr(self) -> bool:
        if self._n_max == self._total_n:
            return False
        m = (self._total_n - self._n_max) / self._n_max * (1.0 / self._total_n)
        bound = math.sqrt(m / 2.0 * math.log(2.0 / self.drift_confidence))
        return self._c_max / self._n_max - self._total_c / self._total_n >= bound

    def _update(self, x: float) -> Outcome:
        self._total_n += 1
        self._total_c += x
        self.filling = self._total_n <= 1
        if self._n_min == 0:
            self._n_min, self._c_min = self._total_n, self._total_c
        if self._n_max == 0:
            self._n_max, self._c_max = self._total_n, self._total_c

        if (
            self._c_min / self._n_min + self._bound(self._n_min, self.drift_confidence)
            >= self._total_c / self._total_n + self._bound(self._total_n, self.drift_confidence)
        ):
            self._n_min, self._c_min = self._total_n, self._total_c
        if (
            self._c_max / self._n_max - self._bound(self._n_max, self.drift_confidence)
            <= self._total_c / self._total_n - self._bound(self._total_n, self.drift_confidence)
        ):
            self._n_max, self._c_max = self._total_n, self._total_c

        if self._mean_incr(self.drift_confidence):
            self.reset()
            return Outcome.DRIFT
        if self.two_sided and self._mean_decr():
            self.reset()
            return Outcome.DRIFT
        if self._mean_incr(self.warning_confidence):
            return Outcome.WARNING
        return Outcome.NORMAL


class _EwmaSample:
    """EWMA estimate plus the accumulated squared-weight sum for its bound."""

    __slots__ = ("estimator", "bounded_sum")

    def __init__(self, estimator: float = -1.0, bounded_sum: float = 0.0) -> None:
        self.estimator = estimator
        self.bounded_sum = bounded_sum

    def copy(self) -> "_EwmaSample":
        return _EwmaSample(self.estimator, self.bounded_sum)

    def add(self, value: float, lam: float) -> None:
        if self.estimator < 0.0:
            self.estimator = value
            self.bounded_sum = 1.0
        else:
            decay = 1.0 - lam
            self.estimator = lam * value + decay * self.estimator
            self.bounded_sum = lam * lam + decay * decay * self.bounded_sum


class HddmWeightedDetector(DriftDetector):
    """HDDM_W: McDiarmid-bound comparison of exponentially weighted means.

    Like :class:`HddmAverageDetector` but the monitored statistic is an EWMA
    (forgetting factor ``lambda_``), with the confidence bound built from the
    accumulated squared weights.  Recent data therefore dominates, making the
    detector responsive to gradual drifts.  Two-sided by default.  The same
    [0, 1] caveat applies: arbitrary reals are accepted, bounds just lose
    their nominal confidence.
    """

    def __init__(
        self,
        drift_confidence: float = 0.001,
        warning_confidence: float = 0.005,
        lambda_: float = 0.05,
        two_sided: bool = True,
    ) -> None:
        self.drift_confidence = drift_confidence
        self.warning_confidence = warning_confidence
        self.lambda_ = lambda_
        self.two_sided = two_sided
        self.reset()

    def reset(self) -> None:
        self._total = _EwmaSample()
        self._sample1_incr = _EwmaSample()
        self._sample2_incr = _EwmaSample()
        self._sample1_decr = _EwmaSample()
        self._sample2_decr = _EwmaSample()
        self._incr_cutpoint = math.inf
        self._decr_cutpoint = -math.inf
        self._width = 0
        self.filling = True

    @staticmethod
    def _detect_increment(sample1: _EwmaSample, sample2: _EwmaSample, confidence: float) -> bool:
        if sample1.estimator < 0.0 or sample2.estimator < 0.0:
            return False
        bound = math.sqrt(
            (sample1.bounded_sum + sample2.bounded_sum) * math.log(1.0 / confidence) / 2.0
        )
        return sample2.estimator - sample1.estimator > bound

    def _update_incr(self, x: float) -> None:
        epsilon = math.sqrt(
            self._total.bounded_sum * math.log(1.0 / self.drift_confidence) / 2.0
        )
        if self._total.estimator + epsilon < self._incr_cutpoint:
            self._incr_cutpoint = self._total.estimator + epsilon
            self._sample1_incr = self._total.copy()
            self._sample2_incr = _EwmaSample()
        else:
            self._sample2_incr.add(x, self.lambda_)

    def _update_decr(self, x: float) -> None:
        epsilon = math.sqrt(
            self._total.bounded_sum * math.log(1.0 / self.drift_confidence) / 2.0
        )
        if self._total.estimator - epsilon > self._decr_cutpoint:
            self._decr_cutpoint = self._total.estimator - epsilon
            self._sample1_decr = self._total.copy()
            self._sample2_decr = _EwmaSample()
        else:
            self._sample2_decr.add(x, self.lambda_)

    def _update(self, x: float) -> Outcome:
        self._width += 1
        self.filling = self._width <= 1
        self._total.add(x, self.lambda_)

        self._update_incr(x)
        if self._detect_increment(self._sample1_incr, self._sample2_incr, self.drift_confidence):
            self.reset()
            return Outcome.DRIFT
        warning = self._detect_increment(
            self._sample1_incr, self._sample2_incr, self.warning_confidence
        )

        self._update_decr(x)
        if self.two_sided and self._detect_increment(
            self._sample2_decr, self._sample1_decr, self.drift_confidence
        ):
            self.reset()
            return Outcome.DRIFT
        return Outcome.WARNING if warning else Outcome.NORMAL
