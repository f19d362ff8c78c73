"""Drift detectors: three window-based finance detectors plus seven
standard streaming detectors, behind one ``update/reset`` interface."""
from __future__ import annotations

from typing import Callable

from .base import DriftDetector, Outcome
from .classic import (
    AdwinDetector,
    DdmDetector,
    EddmDetector,
    HddmAverageDetector,
    HddmWeightedDetector,
    KswinDetector,
    PageHinkleyDetector,
)
from .finance import (
    MIN_SIGMA_FLOOR,
    WINDOW_SIZE,
    MinSigmaBandDetector,
    MinSigmaStdDetector,
    TangentAngleDetector,
)

__all__ = [
    "DriftDetector",
    "Outcome",
    "TangentAngleDetector",
    "MinSigmaBandDetector",
    "MinSigmaStdDetector",
    "AdwinDetector",
    "DdmDetector",
    "EddmDetector",
    "KswinDetector",
    "PageHinkleyDetector",
    "HddmAverageDetector",
    "HddmWeightedDetector",
    "DETECTOR_KINDS",
    "NOVEL_DETECTOR_KINDS",
    "STANDARD_DETECTOR_KINDS",
    "make_detector",
    "WINDOW_SIZE",
    "MIN_SIGMA_FLOOR",
]

#: Detector kinds designed in this package around the 20-point price window.
NOVEL_DETECTOR_KINDS: tuple[str, ...] = ("myTanDD", "MINPS", "mySD")

#: Standard streaming detector kinds.
STANDARD_DETECTOR_KINDS: tuple[str, ...] = (
    "ADWIN",
    "DDM",
    "EDDM",
    "KSWIN",
    "PH",
    "HDDM_A",
    "HDDM_W",
)

DETECTOR_KINDS: tuple[str, ...] = NOVEL_DETECTOR_KINDS + STANDARD_DETECTOR_KINDS

_FACTORIES: dict[str, Callable[..., DriftDetector]] = {
    "myTanDD": TangentAngleDetector,
    "MINPS": MinSigmaBandDetector,
    "mySD": MinSigmaStdDetector,
    "ADWIN": AdwinDetector,
    "DDM": DdmDetector,
    "EDDM": EddmDetector,
    "KSWIN": KswinDetector,
    "PH": PageHinkleyDetector,
    "HDDM_A": HddmAverageDetector,
    "HDDM_W": HddmWeightedDetector,
}


def make_detector(kind: str, seed: int | None = None, **params) -> DriftDetector:
    """Instantiate a detector by kind name.

    ``seed`` is forwarded to detectors that sample (currently KSWIN) and
    ignored by the rest; ``params`` override the kind's default parameters.
    """
    try:
        factory = _FACTORIES[kind]
    except KeyError:
        raise ValueError(
            f"unknown detector kind {kind!r}; expected one of {', '.join(DETECTOR_KINDS)}"
        ) from None
    if kind == "KSWIN":
        return factory(seed=seed, **params)
    return factory(**params)
