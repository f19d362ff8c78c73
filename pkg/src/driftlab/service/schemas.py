"""Request/response models for the HTTP service."""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class SeriesPayload(BaseModel):
    """A close series on the wire; mirrors the TimeSeries container."""

    symbol: str = "SERIES"
    dates: list[str]
    closes: list[float]
    skipped_rows: int = 0
    change_points: list[int] | None = None
    segment_ids: list[int] | None = None


class SegmentModel(BaseModel):
    """One synthetic regime segment."""

    length: int = Field(ge=1)
    drift: float
    vol: float = Field(ge=0.0)


class SyntheticRequest(BaseModel):
    segments: list[SegmentModel]
    seed: int = 0
    symbol: str = "SYNTH"


class DetectorCreateRequest(BaseModel):
    kind: str
    seed: int | None = None
    params: dict[str, float] = Field(default_factory=dict)


class DetectorCreateResponse(BaseModel):
    detector_id: str
    kind: str


class DetectorUpdateRequest(BaseModel):
    values: list[float]


class DetectorUpdateResponse(BaseModel):
    outcomes: list[Literal["Normal", "Warning", "Drift"]]
    filling: list[bool]


class RunRequest(BaseModel):
    series: SeriesPayload
    label: str
    seed: int = 0


class TimingsModel(BaseModel):
    t_learn: float
    t_pred: float
    t_dd_fill: float
    t_dd_detect: float
    t_update: float
    total: float


class BoundsModel(BaseModel):
    t_range: list[int]
    lower_literal: float
    upper_literal: float
    lower_corrected: float
    upper_corrected: float
    learner_ape: float


class RunResponse(BaseModel):
    label: str
    mape_apd_final: float
    drift_points: list[int]
    n_concepts: int
    relearn_count: int
    pending_refit: bool
    timings: TimingsModel
    bounds: BoundsModel
    runtime: float


class BoundsRequest(BaseModel):
    series: SeriesPayload
    t0: int | None = None
    t1: int | None = None
    learner_ape: float = 0.0


class BoundsResponse(BaseModel):
    bounds: BoundsModel
    n_steps: int
    final_avg_abs_perc_error: float


class GridRequest(BaseModel):
    """Run a set of configurations (labels) against one series."""

    series: SeriesPayload
    labels: list[str]
    runs: int = 10
    base_seed: int = 0
    k_equiv: float = 2.0
    select: bool = True  # also compute the equivalence and best sets


class GridJobCreated(BaseModel):
    job_id: str


class GridJobStatus(BaseModel):
    job_id: str
    status: Literal["running", "done", "failed"]
    error: str | None = None
    result: dict | None = None  # ResultTable/EquivalenceSet/BestSet payloads


class CalibrateRequest(BaseModel):
    learners: list[str] | None = None
    detectors: list[str] | None = None
    repeats: int = 5
    seed: int = 0


class CalibrateResponse(BaseModel):
    learn: dict[str, float]
    predict: dict[str, float]
    dd_fill: dict[str, float]
    dd_detect: dict[str, float]
    update: float


class EstimateRequest(BaseModel):
    label: str
    series_length: int
    n_drifts: int = 1
    unit_costs: CalibrateResponse


class EstimateResponse(BaseModel):
    total: float
    tm_learn: float
    tm_pred: float
    tm_cdd_ph1: float
    tm_cdd_ph2: float
    tm_update: float
    n_fits: int
    data_to_predict: int
    clamped: bool


class HealthResponse(BaseModel):
    status: str
    version: str
