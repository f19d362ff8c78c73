"""Drift-aware sliding-window learning for financial time series.

The package pairs streaming drift detectors with price regressors in a
retraining harness: models are refit only when their detector declares the
market regime changed, and the resulting accuracy/runtime trade-off is
measured over a full configuration grid.
"""
from .data import (
    DataError,
    Instance,
    SegmentSpec,
    TimeSeries,
    load_csv,
    make_instances,
    save_csv,
    synth_regime_series,
)
from .detectors import DETECTOR_KINDS, DriftDetector, Outcome, make_detector
from .harness import (
    Configuration,
    PhaseTimings,
    RunResult,
    calibrate_unit_costs,
    cost_breakdown,
    estimate_runtime,
    run,
    run_continuous,
    run_sliding_window,
)
from .learners import LEARNER_KINDS, Learner, make_learner
from .metrics import (
    BoundsReport,
    PredictionLog,
    error_bounds,
    mape,
    mape_apd,
    mape_last_k,
)
from .experiments import (
    BestSet,
    EquivalenceSet,
    Grid,
    ResultTable,
    best_configurations,
    emit_reports,
    find_equivalent_configurations,
    parse_grid_file,
    run_grid,
)

__all__ = [
    "DataError",
    "Instance",
    "SegmentSpec",
    "TimeSeries",
    "load_csv",
    "make_instances",
    "save_csv",
    "synth_regime_series",
    "DETECTOR_KINDS",
    "DriftDetector",
    "Outcome",
    "make_detector",
    "Configuration",
    "PhaseTimings",
    "RunResult",
    "calibrate_unit_costs",
    "cost_breakdown",
    "estimate_runtime",
    "run",
    "run_continuous",
    "run_sliding_window",
    "LEARNER_KINDS",
    "Learner",
    "make_learner",
    "BoundsReport",
    "PredictionLog",
    "error_bounds",
    "mape",
    "mape_apd",
    "mape_last_k",
    "BestSet",
    "EquivalenceSet",
    "Grid",
    "ResultTable",
    "best_configurations",
    "emit_reports",
    "find_equivalent_configurations",
    "parse_grid_file",
    "run_grid",
]
