"""Configuration-grid experiments: run, aggregate, select, report.

A :class:`Grid` enumerates configurations (learners x detectors x input
sources, plus continuous-learning rows); ``run_grid`` executes each one
``runs`` times with seeds ``base_seed + r`` and aggregates into a
:class:`ResultTable` sorted by MAPE.  From the table,
``find_equivalent_configurations`` extracts the set of configurations whose
error is within a factor ``k`` of the best, and ``best_configurations``
reduces that set to the (detector, input) pairs that work for *every*
learner present.  ``emit_reports`` writes the CSV/plain-text artifacts that
back tables and plots.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

from .data import TimeSeries
from .detectors import DETECTOR_KINDS
from .harness import INPUT_SOURCES, Configuration, RunResult, cost_breakdown, run
from .learners import LEARNER_KINDS

DEFAULT_RUNS = 10
DEFAULT_K = 2.0


@dataclass(frozen=True)
class Grid:
    """Cartesian experiment grid; expands to one Configuration per cell."""

    learners: tuple[str, ...] = LEARNER_KINDS
    detectors: tuple[str, ...] = DETECTOR_KINDS
    input_sources: tuple[str, ...] = INPUT_SOURCES
    include_continuous: bool = True
    runs: int = DEFAULT_RUNS
    base_seed: int = 0

    def expand(self) -> list[Configuration]:
        """Every valid configuration in the grid, label-sorted sliding rows
        first per learner, then the learner's continuous row."""
        configs: list[Configuration] = []
        for learner in self.learners:
            for detector in self.detectors:
                for source in self.input_sources:
                    configs.append(
                        Configuration(
                            learner=learner,
                            detector=detector,
                            input_source=source,
                            continuous=False,
                        )
                    )
            if self.include_continuous:
                configs.append(
                    Configuration(
                        learner=learner, detector=None, input_source=None, continuous=True
                    )
                )
        return configs


def parse_grid_file(text: str) -> list[Configuration]:
    """Parse a grid file: one label per line, ``ALL`` wildcards per field.

    Lines look like configuration labels (``LR ADWIN MAPE contLearn F``)
    where any of the learner / detector / input / flag fields may be ``ALL``;
    a line expands to every *valid* configuration matching it.  Blank lines
    and ``#`` comments are skipped; a line matching nothing is an error.
    """
    configs: list[Configuration] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5 or parts[3] != "contLearn":
            raise ValueError(f"grid line {lineno}: malformed configuration {line!r}")
        learners = list(LEARNER_KINDS) if parts[0] == "ALL" else [parts[0]]
        detectors = list(DETECTOR_KINDS) + ["none"] if parts[1] == "ALL" else [parts[1]]
        sources = list(INPUT_SOURCES) + ["none"] if parts[2] == "ALL" else [parts[2]]
        flags = ["T", "F"] if parts[4] == "ALL" else [parts[4]]
        if parts[4] not in ("T", "F", "ALL"):
            raise ValueError(f"grid line {lineno}: bad contLearn flag {parts[4]!r}")

        matched = False
        for learner in learners:
            for detector in detectors:
                for source in sources:
                    for flag in flags:
                        try:
                            cfg = Configuration(
                                learner=learner,
                                detector=None if detector == "none" else detector,
                                input_source=None if source == "none" else source,
                                continuous=flag == "T",
                            )
                        except ValueError:
                            continue
                        matched = True
                        if cfg.label not in seen:
                            seen.add(cfg.label)
                            configs.append(cfg)
        if not matched:
            raise ValueError(f"grid line {lineno}: no valid configuration matches {line!r}")
    return configs


@dataclass
class ResultRow:
    """Aggregate of one configuration over its repetitions."""

    label: str
    runtime_mean: float
    runtime_std: float
    drifts_mean: float
    drifts_std: float
    mape: float
    runtimes: list[float] = field(default_factory=list)
    drift_counts: list[int] = field(default_factory=list)
    mapes: list[float] = field(default_factory=list)
    sample: RunResult | None = None  # the base-seed run, kept for reports

    def to_payload(self) -> dict:
        payload = {
            "label": self.label,
            "runtime_mean": self.runtime_mean,
            "runtime_std": self.runtime_std,
            "drifts_mean": self.drifts_mean,
            "drifts_std": self.drifts_std,
            "mape": self.mape,
            "runtimes": self.runtimes,
            "drift_counts": self.drift_counts,
            "mapes": self.mapes,
        }
        if self.sample is not None:
            s = self.sample
            payload["sample"] = {
                "label": s.label,
                "mape_apd_final": s.mape_apd_final,
                "drift_points": list(s.drift_points),
                "n_concepts": s.n_concepts,
                "relearn_count": s.relearn_count,
                "pending_refit": s.pending_refit,
                "timings": s.timings.as_dict(),
                "bounds": {
                    "t_range": list(s.bounds.t_range),
                    "lower_literal": s.bounds.lower_literal,
                    "upper_literal": s.bounds.upper_literal,
                    "lower_corrected": s.bounds.lower_corrected,
                    "upper_corrected": s.bounds.upper_corrected,
                    "learner_ape": s.bounds.learner_ape,
                },
                "predictions": [[t, a, p] for t, a, p in s.predictions],
                "mape_trace": [[t, m] for t, m in s.mape_trace],
            }
        return payload

    @classmethod
    def from_payload(cls, payload: dict) -> "ResultRow":
        from .harness import PhaseTimings
        from .metrics import BoundsReport

        sample = None
        if payload.get("sample") is not None:
            s = payload["sample"]
            b = s["bounds"]
            sample = RunResult(
                label=s["label"],
                mape_apd_final=s["mape_apd_final"],
                drift_points=list(s["drift_points"]),
                n_concepts=s["n_concepts"],
                relearn_count=s["relearn_count"],
                timings=PhaseTimings(**s["timings"]),
                bounds=BoundsReport(
                    t_range=tuple(b["t_range"]),
                    diff=(),
                    abs_perc=(),
                    avg_abs_perc_error=(),
                    correct_sign=(),
                    d_hat_correct=(),
                    d_hat_wrong=(),
                    lower_literal=b["lower_literal"],
                    upper_literal=b["upper_literal"],
                    lower_corrected=b["lower_corrected"],
                    upper_corrected=b["upper_corrected"],
                    learner_ape=b["learner_ape"],
                ),
                predictions=[(int(t), float(a), float(p)) for t, a, p in s["predictions"]],
                mape_trace=[(int(t), float(m)) for t, m in s["mape_trace"]],
                pending_refit=s.get("pending_refit", False),
            )
        return cls(
            label=payload["label"],
            runtime_mean=payload["runtime_mean"],
            runtime_std=payload["runtime_std"],
            drifts_mean=payload["drifts_mean"],
            drifts_std=payload["drifts_std"],
            mape=payload["mape"],
            runtimes=list(payload.get("runtimes", [])),
            drift_counts=list(payload.get("drift_counts", [])),
            mapes=list(payload.get("mapes", [])),
            sample=sample,
        )


@dataclass
class ResultTable:
    """Rows sorted ascending by MAPE (ties broken by label), plus failures."""

    rows: list[ResultRow]
    failures: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.rows.sort(key=lambda r: (r.mape, r.label))

    def row(self, label: str) -> ResultRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def to_payload(self) -> dict:
        return {
            "rows": [r.to_payload() for r in self.rows],
            "failures": dict(self.failures),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "ResultTable":
        return cls(
            rows=[ResultRow.from_payload(r) for r in payload["rows"]],
            failures=dict(payload.get("failures", {})),
        )


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _std(values: list[float]) -> float:
    m = _mean(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / len(values))


def run_grid(grid: Grid, ts: TimeSeries) -> ResultTable:
    """Run every grid configuration ``grid.runs`` times and aggregate."""
    return run_configurations(grid.expand(), ts, runs=grid.runs, base_seed=grid.base_seed)


def run_configurations(
    configs: list[Configuration],
    ts: TimeSeries,
    runs: int = DEFAULT_RUNS,
    base_seed: int = 0,
) -> ResultTable:
    """Run each configuration ``runs`` times and aggregate into a table.

    Repetition ``r`` uses seed ``base_seed + r``.  A failing configuration is
    recorded under ``failures`` and excluded from the table; it never aborts
    the batch.  Runs execute sequentially so that per-run wall-clock numbers
    are not distorted by contention.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    rows: list[ResultRow] = []
    failures: dict[str, str] = {}
    for cfg in configs:
        runtimes: list[float] = []
        drift_counts: list[int] = []
        mapes: list[float] = []
        sample: RunResult | None = None
        try:
            for r in range(runs):
                result = run(cfg.with_seed(base_seed + r), ts)
                runtimes.append(result.runtime)
                drift_counts.append(len(result.drift_points))
                mapes.append(result.mape_apd_final)
                if r == 0:
                    sample = result
        except Exception as exc:  # noqa: BLE001 - per-config isolation is the contract
            failures[cfg.label] = f"{type(exc).__name__}: {exc}"
            continue
        rows.append(
            ResultRow(
                label=cfg.label,
                runtime_mean=_mean(runtimes),
                runtime_std=_std(runtimes),
                drifts_mean=_mean([float(d) for d in drift_counts]),
                drifts_std=_std([float(d) for d in drift_counts]),
                mape=_mean(mapes),
                runtimes=runtimes,
                drift_counts=drift_counts,
                mapes=mapes,
                sample=sample,
            )
        )
    return ResultTable(rows=rows, failures=failures)


@dataclass(frozen=True)
class EquivalenceSet:
    """Configurations whose MAPE is within ``k`` times the best MAPE."""

    ref_error: float
    ref_label: str
    k: float
    members: frozenset[str]

    def to_payload(self) -> dict:
        return {
            "ref_error": self.ref_error,
            "ref_label": self.ref_label,
            "k": self.k,
            "members": sorted(self.members),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "EquivalenceSet":
        return cls(
            ref_error=payload["ref_error"],
            ref_label=payload["ref_label"],
            k=payload["k"],
            members=frozenset(payload["members"]),
        )


def find_equivalent_configurations(table: ResultTable, k: float = DEFAULT_K) -> EquivalenceSet:
    """Select all rows with ``mape <= k * min(mape)``.

    The methodology requires the baseline learner family in the candidate
    set, so a table without any ``YC`` rows is rejected.  The reference row
    (the global MAPE minimum; first in the sorted table) is always a member,
    and its label is reported.
    """
    if k <= 1.0:
        raise ValueError(f"k must exceed 1, got {k!r}")
    if not table.rows:
        raise ValueError("empty result table")
    if not any(r.label.split()[0] == "YC" for r in table.rows):
        raise ValueError("result table has no YC rows; the candidate set must include them")
    ref = table.rows[0]
    threshold = k * ref.mape
    members = frozenset(r.label for r in table.rows if r.mape <= threshold)
    return EquivalenceSet(ref_error=ref.mape, ref_label=ref.label, k=k, members=members)


@dataclass(frozen=True)
class BestSet:
    """(detector, input) pairs that make the cut for every learner present."""

    pairs: frozenset[tuple[str, str]]

    def to_payload(self) -> dict:
        return {"pairs": sorted(list(p) for p in self.pairs)}

    @classmethod
    def from_payload(cls, payload: dict) -> "BestSet":
        return cls(pairs=frozenset((d, s) for d, s in payload["pairs"]))


def best_configurations(equiv: EquivalenceSet) -> BestSet:
    """Keep the (detector, input) pairs universal across the learners of the set.

    ``L`` is every learner appearing in a member (continuous rows included);
    a sliding-window pair (detector, input) qualifies iff the member set
    contains the configuration (l, detector, input, contLearn F) for every
    l in L.  The result is an unordered set.
    """
    if not equiv.members:
        raise ValueError("empty equivalence set")
    member_configs = [Configuration.from_label(label) for label in equiv.members]
    learners = {cfg.learner for cfg in member_configs}
    candidates = {
        (cfg.detector, cfg.input_source) for cfg in member_configs if not cfg.continuous
    }
    member_labels = set(equiv.members)
    pairs = set()
    for detector, source in candidates:
        wanted = [
            Configuration(
                learner=l, detector=detector, input_source=source, continuous=False
            ).label
            for l in learners
        ]
        if all(label in member_labels for label in wanted):
            pairs.add((detector, source))
    return BestSet(pairs=frozenset(pairs))


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

_TABLE_HEADER = ["label", "runtime_mean", "runtime_std", "drifts_mean", "drifts_std", "mape"]


def _table_row(row: ResultRow) -> list[str]:
    # Runtime columns are wall-clock and not reproducible run-to-run; every
    # other column is deterministic for a fixed base seed.
    return [
        row.label,
        f"{row.runtime_mean:.2f}",
        f"{row.runtime_std:.2f}",
        f"{row.drifts_mean:.2f}",
        f"{row.drifts_std:.2f}",
        f"{row.mape:.6f}",
    ]


def emit_reports(
    table: ResultTable,
    equiv: EquivalenceSet | None,
    best: BestSet | None,
    out_dir: str,
) -> list[str]:
    """Write every report artifact into ``out_dir``; returns the paths.

    - ``results.csv`` — aggregate table sorted by MAPE;
    - ``by_runtime.csv`` — same columns sorted by mean runtime;
    - ``predictions.csv`` — per-step (label, t, actual, predicted, drift);
    - ``mape_trace.csv`` — per-step (label, t, mape_last_k);
    - ``phase_costs.csv`` — per-phase percentages and absolute seconds;
    - ``bounds.csv`` — error-bound scalars per configuration;
    - ``equiv.txt`` / ``best.txt`` — selection listings;
    - ``errors.txt`` — per-configuration failures (only when any occurred).

    Per-step files use each configuration's base-seed run.
    """
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def _open(name: str):
        path = os.path.join(out_dir, name)
        written.append(path)
        return open(path, "w", newline="")

    with _open("results.csv") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TABLE_HEADER)
        for row in table.rows:
            writer.writerow(_table_row(row))

    with _open("by_runtime.csv") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TABLE_HEADER)
        for row in sorted(table.rows, key=lambda r: (r.runtime_mean, r.label)):
            writer.writerow(_table_row(row))

    with _open("predictions.csv") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "t", "actual", "predicted", "drift"])
        for row in table.rows:
            if row.sample is None:
                continue
            drift_set = set(row.sample.drift_points)
            for t, actual, predicted in row.sample.predictions:
                writer.writerow(
                    [row.label, t, repr(actual), repr(predicted), int(t in drift_set)]
                )

    with _open("mape_trace.csv") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "t", "mape_last_k"])
        for row in table.rows:
            if row.sample is None:
                continue
            for t, value in row.sample.mape_trace:
                writer.writerow([row.label, t, repr(value)])

    with _open("phase_costs.csv") as fh:
        writer = csv.writer(fh)
        phases = ["t_learn", "t_pred", "t_dd_fill", "t_dd_detect", "t_update"]
        writer.writerow(
            ["label"] + [f"pct_{p}" for p in phases] + [f"sec_{p}" for p in phases]
        )
        for row in table.rows:
            if row.sample is None:
                continue
            timings = row.sample.timings
            pct = cost_breakdown(timings)
            seconds = timings.as_dict()
            writer.writerow(
                [row.label]
                + [f"{pct[p]:.2f}" for p in phases]
                + [f"{seconds[p]:.4f}" for p in phases]
            )

    with _open("bounds.csv") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "label",
                "lower_literal",
                "upper_literal",
                "lower_corrected",
                "upper_corrected",
                "learner_ape",
            ]
        )
        for row in table.rows:
            if row.sample is None:
                continue
            b = row.sample.bounds
            writer.writerow(
                [
                    row.label,
                    repr(b.lower_literal),
                    repr(b.upper_literal),
                    repr(b.lower_corrected),
                    repr(b.upper_corrected),
                    repr(b.learner_ape),
                ]
            )

    if equiv is not None:
        with _open("equiv.txt") as fh:
            fh.write(f"ref_error {equiv.ref_error:.6f} from {equiv.ref_label!r}, k={equiv.k}\n")
            for label in sorted(equiv.members):
                fh.write(label + "\n")

    if best is not None:
        with _open("best.txt") as fh:
            for detector, source in sorted(best.pairs):
                fh.write(f"{detector} {source}\n")

    if table.failures:
        with _open("errors.txt") as fh:
            for label in sorted(table.failures):
                fh.write(f"{label}: {table.failures[label]}\n")

    return written
