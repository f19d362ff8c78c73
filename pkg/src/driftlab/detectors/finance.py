"""Window-based drift detectors designed around short price windows.

All three share a fixed 20-point sliding window and answer ``NORMAL`` while
the window is still filling (the first 20 updates after construction or
reset).  They differ in what they test once the window is full:

``TangentAngleDetector``
    Classifies the window's trend (Flat / Bull / Bear) from the angle of an
    OLS line fitted over the window and flags drift when the class changes.
``MinSigmaBandDetector``
    Flags drift when the incoming point leaves a ``p ± 3·s_min`` band around
    the window mean, where ``s_min`` is the smallest window deviation seen.
``MinSigmaStdDetector``
    Flags drift when the window's own deviation exceeds ``3·s_min``.

None of them emit warnings: outcomes are only ``NORMAL`` or ``DRIFT``.
"""
from __future__ import annotations

import math
from collections import deque

from .base import DriftDetector, Outcome

#: Number of points each finance detector keeps in its sliding window.
WINDOW_SIZE = 20

#: Floor applied to the minimum observed deviation so the 3-sigma band never
#: collapses to zero width on constant inputs.
MIN_SIGMA_FLOOR = 1e-9

#: Trend-classification band in degrees: angles strictly inside (-6, 6) are
#: Flat, >= +6 Bull, <= -6 Bear.  A 10% rise across the window corresponds to
#: roughly a 5.7 degree angle, so +-6 degrees brackets "about a 10% move".
ANGLE_THRESHOLD_DEG = 6.0

# Precomputed OLS constants for abscissae 0..19: their mean and the centered
# sum of squares sum((i - mean)^2).
_X_MEAN = (WINDOW_SIZE - 1) / 2.0  # 9.5
_SXX = sum((i - _X_MEAN) ** 2 for i in range(WINDOW_SIZE))  # 665.0


def _window_mean_std(values) -> tuple[float, float]:
    """Population mean and standard deviation of an iterable of floats."""
    vals = list(values)
    n = len(vals)
    mean = sum(vals) / n
    var = sum((v - mean) ** 2 for v in vals) / n
    return mean, math.sqrt(var)


class _WindowDetector(DriftDetector):
    """Common sliding-window plumbing: fill phase, eviction, reset."""

    def __init__(self) -> None:
        self._window: deque[float] = deque(maxlen=WINDOW_SIZE)
        self.filling = True

    def reset(self) -> None:
        self._window.clear()
        self.filling = True
        self._reset_state()

    def _reset_state(self) -> None:
        """Clear subclass statistics; default is stateless."""

    def _update(self, x: float) -> Outcome:
        if len(self._window) < WINDOW_SIZE:
            self._window.append(x)
            self.filling = True
            return Outcome.NORMAL
        self.filling = False
        return self._full_update(x)

    def _full_update(self, x: float) -> Outcome:
        raise NotImplementedError


class TangentAngleDetector(_WindowDetector):
    """Trend-class change detector (Flat / Bull / Bear) on a 20-point window.

    Each update slides the window, fits an OLS line ``y = a + b*i`` over the
    20 points, and converts the fitted rise into an angle:
    ``angle = atan(b * 19 / a)`` in degrees — the arctangent of the relative
    change the fitted line projects across the window, which makes the
    classification invariant to the price scale.  Windows are Flat inside
    ``(-6, +6)`` degrees, Bull at ``>= +6`` and Bear at ``<= -6``.  Drift is
    reported exactly when the class differs from the previous window's class.
    A non-positive fitted intercept makes the relative-change reading
    meaningless, so such windows are skipped (no classification, no drift).
    """

    def __init__(self) -> None:
        super().__init__()
        self._current_class: str | None = None

    def _reset_state(self) -> None:
        self._current_class = None

    @property
    def current_class(self) -> str | None:
        """Latest trend class ('Flat' / 'Bull' / 'Bear'), None before one exists."""
        return self._current_class

    @staticmethod
    def classify(window) -> str | None:
        """Classify a full window; None when the fitted intercept is <= 0."""
        vals = list(window)
        y_mean = sum(vals) / WINDOW_SIZE
        sxy = sum((i - _X_MEAN) * v for i, v in enumerate(vals))
        slope = sxy / _SXX
        intercept = y_mean - slope * _X_MEAN
        if intercept <= 0.0:
            return None
        ratio = slope * (WINDOW_SIZE - 1) / intercept
        angle = math.degrees(math.atan(ratio))
        if angle >= ANGLE_THRESHOLD_DEG:
            return "Bull"
        if angle <= -ANGLE_THRESHOLD_DEG:
            return "Bear"
        return "Flat"

    def _full_update(self, x: float) -> Outcome:
        self._window.append(x)  # deque evicts the oldest point
        new_class = self.classify(self._window)
        if new_class is None:
            return Outcome.NORMAL
        previous = self._current_class
        self._current_class = new_class
        if previous is not None and new_class != previous:
            return Outcome.DRIFT
        return Outcome.NORMAL


class MinSigmaBandDetector(DriftDetector):
    """Out-of-band detector: drift when ``|x - p| > 3 * s_min``.

    ``p`` and ``s`` are the mean and deviation of the *current* window — the
    incoming point is tested against the window as it stands, then inserted.
    ``s_min`` is the smallest deviation any tested window has shown, floored
    at ``MIN_SIGMA_FLOOR``, so the band tracks the calmest regime seen since
    the last reset.
    """

    def __init__(self) -> None:
        self._window: deque[float] = deque(maxlen=WINDOW_SIZE)
        self._s_min = math.inf
        self.filling = True

    def reset(self) -> None:
        self._window.clear()
        self._s_min = math.inf
        self.filling = True

    @property
    def s_min(self) -> float:
        """Smallest window deviation observed so far (inf before full)."""
        return self._s_min

    def _update(self, x: float) -> Outcome:
        if len(self._window) < WINDOW_SIZE:
            self._window.append(x)
            self.filling = True
            return Outcome.NORMAL
        self.filling = False
        p, s = _window_mean_std(self._window)
        self._s_min = max(min(self._s_min, s), MIN_SIGMA_FLOOR)
        outcome = Outcome.DRIFT if abs(x - p) > 3.0 * self._s_min else Outcome.NORMAL
        self._window.append(x)
        return outcome


class MinSigmaStdDetector(_WindowDetector):
    """Volatility-burst detector: drift when the window deviation itself
    exceeds three times the smallest deviation previously observed.

    The incoming point first slides the window; its deviation ``s`` is then
    compared against ``3 * s_min`` *before* ``s`` is allowed to lower
    ``s_min``, so a sudden calm-to-noisy transition is judged against the calm
    baseline.
    """

    def __init__(self) -> None:
        super().__init__()
        self._s_min = math.inf

    def _reset_state(self) -> None:
        self._s_min = math.inf

    @property
    def s_min(self) -> float:
        """Smallest post-insertion window deviation seen before this update."""
        return self._s_min

    def _full_update(self, x: float) -> Outcome:
        self._window.append(x)
        _, s = _window_mean_std(self._window)
        drifted = self._s_min < math.inf and s > 3.0 * self._s_min
        self._s_min = max(min(self._s_min, s), MIN_SIGMA_FLOOR)
        return Outcome.DRIFT if drifted else Outcome.NORMAL
