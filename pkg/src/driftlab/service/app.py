"""HTTP service exposing the toolkit: series generation, detector sessions,
single runs, error bounds, grid experiments (as background jobs), unit-cost
calibration and runtime estimation.

State is process-local: detector sessions and grid jobs live in dictionaries
guarded by a lock.  Grid jobs run on a worker thread and are polled by id.
"""
from __future__ import annotations

import threading
import uuid
from importlib import metadata as importlib_metadata

from fastapi import FastAPI, HTTPException

from ..data import DataError, SegmentSpec, TimeSeries, synth_regime_series
from ..detectors import DETECTOR_KINDS, DriftDetector, make_detector
from ..harness import (
    Configuration,
    RuntimeEstimate,
    UnitCosts,
    calibrate_unit_costs,
    estimate_runtime,
    run,
)
from ..experiments import (
    ResultTable,
    best_configurations,
    find_equivalent_configurations,
    run_configurations,
)
from .schemas import (
    BoundsModel,
    BoundsRequest,
    BoundsResponse,
    CalibrateRequest,
    CalibrateResponse,
    DetectorCreateRequest,
    DetectorCreateResponse,
    DetectorUpdateRequest,
    DetectorUpdateResponse,
    EstimateRequest,
    EstimateResponse,
    GridJobCreated,
    GridJobStatus,
    GridRequest,
    HealthResponse,
    RunRequest,
    RunResponse,
    SeriesPayload,
    SyntheticRequest,
    TimingsModel,
)

try:
    _VERSION = importlib_metadata.version("driftlab")
except importlib_metadata.PackageNotFoundError:  # pragma: no cover - dev tree
    _VERSION = "0.0.0"

app = FastAPI(title="driftlab", version=_VERSION)

_lock = threading.Lock()
_detectors: dict[str, DriftDetector] = {}
_jobs: dict[str, dict] = {}


def _series_from_payload(payload: SeriesPayload) -> TimeSeries:
    try:
        return TimeSeries(
            symbol=payload.symbol,
            dates=tuple(payload.dates),
            closes=tuple(payload.closes),
            skipped_rows=payload.skipped_rows,
            change_points=tuple(payload.change_points) if payload.change_points else None,
            segment_ids=tuple(payload.segment_ids) if payload.segment_ids else None,
        )
    except DataError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _series_to_payload(ts: TimeSeries) -> SeriesPayload:
    return SeriesPayload(
        symbol=ts.symbol,
        dates=list(ts.dates),
        closes=list(ts.closes),
        skipped_rows=ts.skipped_rows,
        change_points=list(ts.change_points) if ts.change_points is not None else None,
        segment_ids=list(ts.segment_ids) if ts.segment_ids is not None else None,
    )


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=_VERSION)


@app.post("/series/synthetic", response_model=SeriesPayload)
def synthetic_series(req: SyntheticRequest) -> SeriesPayload:
    try:
        ts = synth_regime_series(
            [SegmentSpec(s.length, s.drift, s.vol) for s in req.segments],
            seed=req.seed,
            symbol=req.symbol,
        )
    except DataError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return _series_to_payload(ts)


# -- detector sessions -------------------------------------------------------


@app.post("/detectors", response_model=DetectorCreateResponse)
def create_detector(req: DetectorCreateRequest) -> DetectorCreateResponse:
    if req.kind not in DETECTOR_KINDS:
        raise HTTPException(status_code=422, detail=f"unknown detector kind {req.kind!r}")
    try:
        detector = make_detector(req.kind, seed=req.seed, **req.params)
    except (TypeError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    detector_id = uuid.uuid4().hex
    with _lock:
        _detectors[detector_id] = detector
    return DetectorCreateResponse(detector_id=detector_id, kind=req.kind)


def _get_detector(detector_id: str) -> DriftDetector:
    with _lock:
        detector = _detectors.get(detector_id)
    if detector is None:
        raise HTTPException(status_code=404, detail=f"no detector {detector_id!r}")
    return detector


@app.post("/detectors/{detector_id}/update", response_model=DetectorUpdateResponse)
def update_detector(detector_id: str, req: DetectorUpdateRequest) -> DetectorUpdateResponse:
    detector = _get_detector(detector_id)
    outcomes: list[str] = []
    filling: list[bool] = []
    for value in req.values:
        try:
            outcome = detector.update(value)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        outcomes.append(outcome.value)
        filling.append(detector.filling)
    return DetectorUpdateResponse(outcomes=outcomes, filling=filling)


@app.post("/detectors/{detector_id}/reset")
def reset_detector(detector_id: str) -> dict:
    _get_detector(detector_id).reset()
    return {"status": "reset"}


@app.delete("/detectors/{detector_id}")
def delete_detector(detector_id: str) -> dict:
    with _lock:
        if detector_id not in _detectors:
            raise HTTPException(status_code=404, detail=f"no detector {detector_id!r}")
        del _detectors[detector_id]
    return {"status": "deleted"}


# -- runs ---------------------------------------------------------------------


def _run_response(result) -> RunResponse:
    return RunResponse(
        label=result.label,
        mape_apd_final=result.mape_apd_final,
        drift_points=list(result.drift_points),
        n_concepts=result.n_concepts,
        relearn_count=result.relearn_count,
        pending_refit=result.pending_refit,
        timings=TimingsModel(**result.timings.as_dict(), total=result.timings.total),
        bounds=BoundsModel(
            t_range=list(result.bounds.t_range),
            lower_literal=result.bounds.lower_literal,
            upper_literal=result.bounds.upper_literal,
            lower_corrected=result.bounds.lower_corrected,
            upper_corrected=result.bounds.upper_corrected,
            learner_ape=result.bounds.learner_ape,
        ),
        runtime=result.runtime,
    )


@app.post("/run", response_model=RunResponse)
def run_configuration(req: RunRequest) -> RunResponse:
    ts = _series_from_payload(req.series)
    try:
        cfg = Configuration.from_label(req.label, seed=req.seed)
        result = run(cfg, ts)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return _run_response(result)


@app.post("/bounds", response_model=BoundsResponse)
def bounds_endpoint(req: BoundsRequest) -> BoundsResponse:
    from ..metrics import error_bounds

    ts = _series_from_payload(req.series)
    t0 = req.t0 if req.t0 is not None else 1
    t1 = req.t1 if req.t1 is not None else len(ts.closes) - 1
    try:
        report = error_bounds(ts, learner_ape=req.learner_ape, t_range=(t0, t1))
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return BoundsResponse(
        bounds=BoundsModel(
            t_range=list(report.t_range),
            lower_literal=report.lower_literal,
            upper_literal=report.upper_literal,
            lower_corrected=report.lower_corrected,
            upper_corrected=report.upper_corrected,
            learner_ape=report.learner_ape,
        ),
        n_steps=len(report.abs_perc),
        final_avg_abs_perc_error=report.avg_abs_perc_error[-1],
    )


# -- grid jobs ------------------------------------------------------------------


def _grid_worker(job_id: str, req: GridRequest, ts: TimeSeries) -> None:
    try:
        configs = [Configuration.from_label(label) for label in req.labels]
        table = run_configurations(configs, ts, runs=req.runs, base_seed=req.base_seed)
        result: dict = {"table": table.to_payload()}
        if req.select:
            equiv = find_equivalent_configurations(table, k=req.k_equiv)
            best = best_configurations(equiv)
            result["equiv"] = equiv.to_payload()
            result["best"] = best.to_payload()
        with _lock:
            _jobs[job_id].update(status="done", result=result)
    except Exception as exc:  # noqa: BLE001 - job isolation
        with _lock:
            _jobs[job_id].update(status="failed", error=f"{type(exc).__name__}: {exc}")


@app.post("/grid", response_model=GridJobCreated)
def submit_grid(req: GridRequest) -> GridJobCreated:
    if not req.labels:
        raise HTTPException(status_code=422, detail="no configurations given")
    for label in req.labels:
        try:
            Configuration.from_label(label)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
    ts = _series_from_payload(req.series)
    job_id = uuid.uuid4().hex
    with _lock:
        _jobs[job_id] = {"status": "running", "error": None, "result": None}
    thread = threading.Thread(target=_grid_worker, args=(job_id, req, ts), daemon=True)
    thread.start()
    return GridJobCreated(job_id=job_id)


@app.get("/grid/{job_id}", response_model=GridJobStatus)
def grid_status(job_id: str) -> GridJobStatus:
    with _lock:
        job = _jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no grid job {job_id!r}")
        return GridJobStatus(job_id=job_id, **job)


# -- calibration / estimation ----------------------------------------------------


@app.post("/calibrate", response_model=CalibrateResponse)
def calibrate(req: CalibrateRequest) -> CalibrateResponse:
    try:
        costs = calibrate_unit_costs(
            learners=req.learners, detectors=req.detectors, repeats=req.repeats, seed=req.seed
        )
    except (KeyError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return CalibrateResponse(
        learn=costs.learn,
        predict=costs.predict,
        dd_fill=costs.dd_fill,
        dd_detect=costs.dd_detect,
        update=costs.update,
    )


@app.post("/estimate", response_model=EstimateResponse)
def estimate(req: EstimateRequest) -> EstimateResponse:
    costs = UnitCosts(
        learn=req.unit_costs.learn,
        predict=req.unit_costs.predict,
        dd_fill=req.unit_costs.dd_fill,
        dd_detect=req.unit_costs.dd_detect,
        update=req.unit_costs.update,
    )
    try:
        cfg = Configuration.from_label(req.label)
        est: RuntimeEstimate = estimate_runtime(cfg, req.series_length, costs, req.n_drifts)
    except (KeyError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return EstimateResponse(
        total=est.total,
        tm_learn=est.tm_learn,
        tm_pred=est.tm_pred,
        tm_cdd_ph1=est.tm_cdd_ph1,
        tm_cdd_ph2=est.tm_cdd_ph2,
        tm_update=est.tm_update,
        n_fits=est.n_fits,
        data_to_predict=est.data_to_predict,
        clamped=est.clamped,
    )
