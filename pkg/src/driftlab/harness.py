"""End-to-end execution of one learning configuration on one series.

Two modes share the prediction/logging machinery:

- sliding-window (``run_sliding_window``): fit once on the first 30
  instances, then only refit when the drift detector fires — collection of
  the new 30-instance training set starts at the active warning point if one
  exists, else at the drift point, and the incumbent model keeps predicting
  while the new set accumulates;
- continuous (``run_continuous``): refit on the rolling last-30 window
  before every single prediction.

Each run wall-clocks five phases (initial+re-fits, prediction, detector
window filling, detector decision making, log/bookkeeping updates) so that
configurations can be compared on cost structure, and ``estimate_runtime``
reproduces the analytic cost model from per-operation unit costs.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .data import Instance, TimeSeries, make_instances
from .detectors import DETECTOR_KINDS, Outcome, make_detector
from .learners import LEARNER_KINDS, make_learner
from .metrics import (
    BoundsReport,
    PredictionLog,
    error_bounds,
    mape_apd,
    mape_last_k,
)

#: Size of every training set (and of the continuous-learning rolling window).
TRAINING_SET_SIZE = 30

#: Window updates a freshly reset detector spends filling before it can act;
#: used by the analytic cost model (matches the novel detectors' window).
DETECTOR_FILL_UPDATES = 20

#: Detectors that sample internally (KSWIN) are seeded with this constant
#: rather than the run seed: repetitions of a configuration must reproduce
#: identical drift positions (the run seed only varies learner randomness).
DETECTOR_SAMPLING_SEED = 7

INPUT_SOURCES = ("MAPE", "DATA")


class ConfigError(ValueError):
    """Raised for malformed configurations or labels."""


@dataclass(frozen=True)
class Configuration:
    """One experiment cell: learner, detector, detector input and mode.

    ``continuous=True`` excludes a detector (the model is refit every step,
    so there is nothing for a detector to trigger); sliding-window mode
    requires both a detector kind and an input source.
    """

    learner: str
    detector: str | None
    input_source: str | None
    continuous: bool
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learner not in LEARNER_KINDS:
            raise ConfigError(f"unknown learner {self.learner!r}")
        if self.continuous:
            if self.detector is not None or self.input_source is not None:
                raise ConfigError("continuous learning uses no detector and no input source")
        else:
            if self.detector not in DETECTOR_KINDS:
                raise ConfigError(f"unknown detector {self.detector!r}")
            if self.input_source not in INPUT_SOURCES:
                raise ConfigError(
                    f"input_source must be one of {INPUT_SOURCES}, got {self.input_source!r}"
                )

    @property
    def label(self) -> str:
        """Canonical space-separated label, e.g. ``'LR ADWIN MAPE contLearn F'``."""
        det = self.detector if self.detector is not None else "none"
        src = self.input_source if self.input_source is not None else "none"
        return f"{self.learner} {det} {src} contLearn {'T' if self.continuous else 'F'}"

    @classmethod
    def from_label(cls, label: str, seed: int = 0) -> "Configuration":
        """Parse a canonical label back into a configuration."""
        parts = label.split()
        if len(parts) != 5 or parts[3] != "contLearn" or parts[4] not in ("T", "F"):
            raise ConfigError(f"malformed configuration label {label!r}")
        learner, detector, source = parts[0], parts[1], parts[2]
        continuous = parts[4] == "T"
        return cls(
            learner=learner,
            detector=None if detector == "none" else detector,
            input_source=None if source == "none" else source,
            continuous=continuous,
            seed=seed,
        )

    def with_seed(self, seed: int) -> "Configuration":
        return Configuration(self.learner, self.detector, self.input_source, self.continuous, seed)


@dataclass
class PhaseTimings:
    """Wall-clock seconds spent per phase; the five phases partition a run."""

    t_learn: float = 0.0
    t_pred: float = 0.0
    t_dd_fill: float = 0.0
    t_dd_detect: float = 0.0
    t_update: float = 0.0

    @property
    def total(self) -> float:
        return self.t_learn + self.t_pred + self.t_dd_fill + self.t_dd_detect + self.t_update

    @property
    def t_detector(self) -> float:
        """Total detector time (fill + detect)."""
        return self.t_dd_fill + self.t_dd_detect

    def as_dict(self) -> dict[str, float]:
        return {
            "t_learn": self.t_learn,
            "t_pred": self.t_pred,
            "t_dd_fill": self.t_dd_fill,
            "t_dd_detect": self.t_dd_detect,
            "t_update": self.t_update,
        }


def cost_breakdown(timings: PhaseTimings) -> dict[str, float]:
    """Per-phase percentages of the run total (they sum to 100)."""
    total = timings.total
    if total <= 0.0:
        raise ValueError("cannot break down a run with zero total time")
    return {name: 100.0 * value / total for name, value in timings.as_dict().items()}


@dataclass
class RunResult:
    """Everything one run produces, enough to rebuild every report row."""

    label: str
    mape_apd_final: float
    drift_points: list[int]
    n_concepts: int
    relearn_count: int
    timings: PhaseTimings
    bounds: BoundsReport
    predictions: list[tuple[int, float, float]]  # (t, actual, predicted)
    mape_trace: list[tuple[int, float]]  # (t, mape_last_k after the step)
    pending_refit: bool = False

    @property
    def runtime(self) -> float:
        return self.timings.total


def _check_series(ts: TimeSeries) -> list[Instance]:
    instances = make_instances(ts)
    if len(instances) < TRAINING_SET_SIZE + 1:
        raise ValueError(
            f"series yields {len(instances)} instances; need at least "
            f"{TRAINING_SET_SIZE + 1} (one training set plus one prediction)"
        )
    return instances


def _finish(
    cfg: Configuration,
    ts: TimeSeries,
    log: PredictionLog,
    drift_points: list[int],
    relearn_count: int,
    timings: PhaseTimings,
    trace: list[tuple[int, float]],
    pending_refit: bool,
) -> RunResult:
    final = mape_apd(log)
    bounds = error_bounds(ts, learner_ape=final, t_range=(log.times[0], log.times[-1]))
    predictions = [
        (t, a, p) for t, p, a in zip(log.times, log.predicted, log.actual)
    ]
    return RunResult(
        label=cfg.label,
        mape_apd_final=final,
        drift_points=drift_points,
        n_concepts=len(drift_points) + 1,
        relearn_count=relearn_count,
        timings=timings,
        bounds=bounds,
        predictions=predictions,
        mape_trace=trace,
        pending_refit=pending_refit,
    )


def run_sliding_window(cfg: Configuration, ts: TimeSeries) -> RunResult:
    """Execute one sliding-window run: predict every instance after the first
    training set, refitting only when the detector declares drift."""
    if cfg.continuous:
        raise ConfigError("run_sliding_window needs a sliding-window configuration")
    instances = _check_series(ts)
    model = make_learner(cfg.learner, seed=cfg.seed)
    detector = make_detector(cfg.detector, seed=DETECTOR_SAMPLING_SEED)
    timings = PhaseTimings()
    log = PredictionLog()
    trace: list[tuple[int, float]] = []
    drift_points: list[int] = []
    use_mape_input = cfg.input_source == "MAPE"

    perf = time.perf_counter
    t0 = perf()
    model.fit(instances[:TRAINING_SET_SIZE])
    timings.t_learn += perf() - t0
    log.reset_segment()

    relearn_count = 0
    collecting = False
    collect_start = 0  # index into `instances` of the pending training set's first row
    warning_idx: int | None = None

    for i in range(TRAINING_SET_SIZE, len(instances)):
        inst = instances[i]
        iter_start = perf()
        inner = 0.0

        p0 = perf()
        predicted = model.predict(inst.features)
        p1 = perf()
        timings.t_pred += p1 - p0
        inner += p1 - p0

        log.append(inst.t, predicted, inst.target)
        current_mape = mape_last_k(log)
        trace.append((inst.t, current_mape))

        if collecting:
            if i - collect_start + 1 >= TRAINING_SET_SIZE:
                f0 = perf()
                model.fit(instances[collect_start : i + 1])
                f1 = perf()
                timings.t_learn += f1 - f0
                inner += f1 - f0
                log.reset_segment()
                relearn_count += 1
                collecting = False
        else:
            x = current_mape if use_mape_input else inst.target
            d0 = perf()
            outcome = detector.update(x)
            d1 = perf()
            if detector.filling:
                timings.t_dd_fill += d1 - d0
            else:
                timings.t_dd_detect += d1 - d0
            inner += d1 - d0

            if outcome is Outcome.WARNING:
                if warning_idx is None:
                    warning_idx = i
            elif outcome is Outcome.NORMAL:
                warning_idx = None
            else:  # DRIFT
                drift_points.append(inst.t)
                collect_start = warning_idx if warning_idx is not None else i
                warning_idx = None
                detector.reset()
                if i - collect_start + 1 >= TRAINING_SET_SIZE:
                    # The warning predates the drift by enough: refit on
                    # everything from the warning point (may exceed 30 rows).
                    f0 = perf()
                    model.fit(instances[collect_start : i + 1])
                    f1 = perf()
                    timings.t_learn += f1 - f0
                    inner += f1 - f0
                    log.reset_segment()
                    relearn_count += 1
                else:
                    collecting = True

        timings.t_update += perf() - iter_start - inner

    return _finish(cfg, ts, log, drift_points, relearn_count, timings, trace, collecting)


def run_continuous(cfg: Configuration, ts: TimeSeries) -> RunResult:
    """Execute one continuous-learning run: refit on the rolling last-30
    window before every prediction."""
    if not cfg.continuous:
        raise ConfigError("run_continuous needs a continuous configuration")
    instances = _check_series(ts)
    model = make_learner(cfg.learner, seed=cfg.seed)
    timings = PhaseTimings()
    log = PredictionLog()
    trace: list[tuple[int, float]] = []
    relearn_count = 0

    perf = time.perf_counter
    for i in range(TRAINING_SET_SIZE, len(instances)):
        inst = instances[i]
        iter_start = perf()
        inner = 0.0

        f0 = perf()
        model.fit(instances[i - TRAINING_SET_SIZE : i])
        f1 = perf()
        timings.t_learn += f1 - f0
        inner += f1 - f0
        log.reset_segment()
        relearn_count += 1

        p0 = perf()
        predicted = model.predict(inst.features)
        p1 = perf()
        timings.t_pred += p1 - p0
        inner += p1 - p0

        log.append(inst.t, predicted, inst.target)
        trace.append((inst.t, mape_last_k(log)))

        timings.t_update += perf() - iter_start - inner

    return _finish(cfg, ts, log, [], relearn_count, timings, trace, False)


def run(cfg: Configuration, ts: TimeSeries) -> RunResult:
    """Dispatch to the mode the configuration asks for."""
    return run_continuous(cfg, ts) if cfg.continuous else run_sliding_window(cfg, ts)


# ---------------------------------------------------------------------------
# Analytic runtime model
# ---------------------------------------------------------------------------


@dataclass
class UnitCosts:
    """Micro-benchmarked per-operation costs (seconds).

    ``learn`` maps learner kind to the cost of fitting *one training
    instance* (a 30-row fit costs 30x this); ``predict`` maps learner kind to
    one prediction; ``dd_fill``/``dd_detect`` map detector kind to one update
    in the respective phase; ``update`` is one log/bookkeeping step.
    """

    learn: dict[str, float]
    predict: dict[str, float]
    dd_fill: dict[str, float]
    dd_detect: dict[str, float]
    update: float


@dataclass
class RuntimeEstimate:
    """Analytic runtime built from unit costs and a drift count."""

    total: float
    tm_learn: float
    tm_pred: float
    tm_cdd_ph1: float
    tm_cdd_ph2: float
    tm_update: float
    n_fits: int
    data_to_predict: int
    clamped: bool  # True when the fill budget exceeded the prediction count


def estimate_runtime(
    cfg: Configuration,
    series_length: int,
    unit_costs: UnitCosts,
    n_drifts: int,
) -> RuntimeEstimate:
    """Predict a run's wall clock from unit costs.

    ``n_drifts`` follows the result-table convention: the number of concepts
    fitted, i.e. 1 when no drift fired.  Phase-1 detector work (window
    filling) costs 20 updates per fitted concept; the remaining predictions
    carry phase-2 (decision) updates.  A fill budget larger than the stream
    clamps phase 2 at zero and flags the estimate.
    """
    n_instances = series_length - 3
    data_to_predict = n_instances - TRAINING_SET_SIZE
    if data_to_predict <= 0:
        raise ValueError(f"series of length {series_length} leaves nothing to predict")

    learn_cost = unit_costs.learn[cfg.learner]
    pred_cost = unit_costs.predict[cfg.learner]

    if cfg.continuous:
        n_fits = data_to_predict
        tm_learn = n_fits * learn_cost * TRAINING_SET_SIZE
        tm_ph1 = 0.0
        tm_ph2 = 0.0
        clamped = False
    else:
        if n_drifts < 1:
            raise ValueError("n_drifts counts fitted concepts and is at least 1")
        n_fits = n_drifts
        tm_learn = n_fits * learn_cost * TRAINING_SET_SIZE
        fill_updates = n_fits * DETECTOR_FILL_UPDATES
        detect_updates = data_to_predict - fill_updates
        clamped = detect_updates < 0
        if clamped:
            detect_updates = 0
        tm_ph1 = fill_updates * unit_costs.dd_fill[cfg.detector]
        tm_ph2 = detect_updates * unit_costs.dd_detect[cfg.detector]

    tm_pred = data_to_predict * pred_cost
    tm_update = data_to_predict * unit_costs.update
    total = tm_learn + tm_pred + tm_ph1 + tm_ph2 + tm_update
    return RuntimeEstimate(
        total=total,
        tm_learn=tm_learn,
        tm_pred=tm_pred,
        tm_cdd_ph1=tm_ph1,
        tm_cdd_ph2=tm_ph2,
        tm_update=tm_update,
        n_fits=n_fits,
        data_to_predict=data_to_predict,
        clamped=clamped,
    )


def calibrate_unit_costs(
    learners: Sequence[str] | None = None,
    detectors: Sequence[str] | None = None,
    repeats: int = 5,
    seed: int = 0,
) -> UnitCosts:
    """Micro-benchmark per-operation costs on a small synthetic workload.

    Each learner is fitted ``repeats`` times on a 30-instance training set
    (median time, divided by 30, gives the per-instance cost); each detector
    is driven through enough updates to measure both its filling and its
    deciding phase.  Medians keep one-off scheduler hiccups out.
    """
    from statistics import median

    from .data import synth_regime_series

    learners = list(learners) if learners is not None else list(LEARNER_KINDS)
    detectors = list(detectors) if detectors is not None else list(DETECTOR_KINDS)

    ts = synth_regime_series([(160, 0.001, 0.01)], seed=seed)
    instances = make_instances(ts)
    train = instances[:TRAINING_SET_SIZE]
    perf = time.perf_counter

    learn_costs: dict[str, float] = {}
    pred_costs: dict[str, float] = {}
    for kind in learners:
        model = make_learner(kind, seed=seed)
        fit_times = []
        for _ in range(repeats):
            t0 = perf()
            model.fit(train)
            fit_times.append(perf() - t0)
        learn_costs[kind] = median(fit_times) / TRAINING_SET_SIZE

        features = instances[TRAINING_SET_SIZE].features
        # predictions are microseconds; time a batch to get above clock noise
        batch = 200
        pred_times = []
        for _ in range(repeats):
            t0 = perf()
            for _ in range(batch):
                model.predict(features)
            pred_times.append((perf() - t0) / batch)
        pred_costs[kind] = median(pred_times)

    fill_costs: dict[str, float] = {}
    detect_costs: dict[str, float] = {}
    values = [float(c) for c in ts.closes]
    for kind in detectors:
        detector = make_detector(kind, seed=seed)
        fills: list[float] = []
        detects: list[float] = []
        for x in values:
            t0 = perf()
            detector.update(x)
            dt = perf() - t0
            (fills if detector.filling else detects).append(dt)
        fill_costs[kind] = median(fills) if fills else (median(detects) if detects else 0.0)
        detect_costs[kind] = median(detects) if detects else fill_costs[kind]

    # One bookkeeping step: append + rolling-error read.
    log = PredictionLog()
    update_times = []
    for t, x in enumerate(values):
        t0 = perf()
        log.append(t, x, x)
        mape_last_k(log)
        update_times.append(perf() - t0)
    update_cost = median(update_times)

    return UnitCosts(
        learn=learn_costs,
        predict=pred_costs,
        dd_fill=fill_costs,
        dd_detect=detect_costs,
        update=update_cost,
    )
