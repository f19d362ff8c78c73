"""Shared drift-detector interface.

Every detector is a small state machine fed one value per call: it answers
``NORMAL``, ``WARNING`` or ``DRIFT`` and can be reset to its freshly
constructed state at any time.  Detectors that need randomness own a seeded
generator which ``reset`` reseeds identically, so a replay of the same input
sequence always reproduces the same outcome sequence.
"""
from __future__ import annotations

import enum
import math
from abc import ABC, abstractmethod


class Outcome(enum.Enum):
    """Per-update verdict of a drift detector."""

    NORMAL = "Normal"
    WARNING = "Warning"
    DRIFT = "Drift"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


class DriftDetector(ABC):
    """Base class: input validation, fill-phase flag, reset contract.

    Subclasses implement ``_update`` and may set ``filling`` to ``True`` for
    updates spent building internal state rather than testing for drift; the
    run harness uses that flag to split detection cost into a fill phase and
    a detect phase.
    """

    #: Whether the most recent update was a fill-phase update.
    filling: bool = False

    def update(self, x: float) -> Outcome:
        """Consume one value and report the detector's verdict."""
        if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
            raise ValueError(f"detector input must be a finite real, got {x!r}")
        return self._update(float(x))

    @abstractmethod
    def _update(self, x: float) -> Outcome:
        ...

    @abstractmethod
    def reset(self) -> None:
        """Return to the freshly constructed state (reseeding any RNG)."""
