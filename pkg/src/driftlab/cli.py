"""Command-line client for the service.

Every command speaks the HTTP API.  Without ``--server`` the app is mounted
in-process (no socket, no setup); with ``--server URL`` the same requests go
to a running instance.  File I/O — reading price CSVs and grid files,
writing report files — always happens on the client side.

Commands: ``run`` (grid experiment + reports), ``bounds`` (error-bound
report for a series), ``calibrate`` (unit-cost micro-benchmarks), ``serve``
(start the HTTP service).
"""
from __future__ import annotations

import json
import sys
import time

import click

from .data import DataError, TimeSeries, load_csv, save_csv, save_segments_csv


class ClientError(click.ClickException):
    """CLI-level failure with a diagnostic line and nonzero exit."""


class ApiClient:
    """Minimal JSON-over-HTTP client; in-process by default."""

    def __init__(self, server: str | None) -> None:
        if server is None:
            from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)
        else:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)

    def request(self, method: str, path: str, payload: dict | None = None) -> dict:
        try:
            response = self._client.request(method, path, json=payload)
        except Exception as exc:  # connection-level failure
            raise ClientError(f"cannot reach server: {exc}") from exc
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except Exception:
                detail = response.text
            raise ClientError(f"{method} {path} failed ({response.status_code}): {detail}")
        return response.json()

    def post(self, path: str, payload: dict) -> dict:
        return self.request("POST", path, payload)

    def get(self, path: str) -> dict:
        return self.request("GET", path)


def _series_payload(ts: TimeSeries) -> dict:
    return {
        "symbol": ts.symbol,
        "dates": list(ts.dates),
        "closes": list(ts.closes),
        "skipped_rows": ts.skipped_rows,
        "change_points": list(ts.change_points) if ts.change_points is not None else None,
        "segment_ids": list(ts.segment_ids) if ts.segment_ids is not None else None,
    }


def _series_from_payload(payload: dict) -> TimeSeries:
    return TimeSeries(
        symbol=payload["symbol"],
        dates=tuple(payload["dates"]),
        closes=tuple(payload["closes"]),
        skipped_rows=payload.get("skipped_rows", 0),
        change_points=tuple(payload["change_points"]) if payload.get("change_points") else None,
        segment_ids=tuple(payload["segment_ids"]) if payload.get("segment_ids") else None,
    )


def parse_synthetic_spec(spec: str) -> list[dict]:
    """Parse ``LENGTH:DRIFT:VOL[,LENGTH:DRIFT:VOL...]`` into segment dicts."""
    segments = []
    for part in spec.split(","):
        fields = part.split(":")
        if len(fields) != 3:
            raise ClientError(
                f"bad synthetic segment {part!r}; expected LENGTH:DRIFT:VOL"
            )
        try:
            segments.append(
                {"length": int(fields[0]), "drift": float(fields[1]), "vol": float(fields[2])}
            )
        except ValueError as exc:
            raise ClientError(f"bad synthetic segment {part!r}: {exc}") from exc
    return segments


def _load_series(
    client: ApiClient,
    data: str | None,
    synthetic: str | None,
    column: str,
    seed: int,
) -> TimeSeries:
    if (data is None) == (synthetic is None):
        raise ClientError("exactly one of --data and --synthetic is required")
    if data is not None:
        try:
            return load_csv(data, column=column)
        except DataError as exc:
            raise ClientError(str(exc)) from exc
    payload = client.post(
        "/series/synthetic",
        {"segments": parse_synthetic_spec(synthetic), "seed": seed, "symbol": "SYNTH"},
    )
    return _series_from_payload(payload)


@click.group()
def main() -> None:
    """Drift-aware sliding-window learning experiments."""


server_option = click.option(
    "--server",
    default=None,
    metavar="URL",
    help="Base URL of a running service; default runs the service in-process.",
)


@main.command("run")
@click.option("--data", type=click.Path(), default=None, help="Price CSV (Date + price column).")
@click.option(
    "--synthetic",
    default=None,
    metavar="SPEC",
    help="Synthetic series spec LENGTH:DRIFT:VOL[,...] instead of --data.",
)
@click.option("--grid", "grid_path", type=click.Path(), required=True, help="Grid file (ALL wildcards allowed).")
@click.option("--runs", default=10, show_default=True, help="Repetitions per configuration.")
@click.option("--seed", default=0, show_default=True, help="Base seed (run r uses seed+r); also seeds --synthetic.")
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Report output directory.")
@click.option("--k-equiv", default=2.0, show_default=True, help="Equivalence threshold factor k (> 1).")
@click.option("--column", default="Close", show_default=True, help="Price column name in --data.")
@click.option("--poll", default=0.2, show_default=True, help="Grid job poll interval (seconds).")
@server_option
def run_command(
    data: str | None,
    synthetic: str | None,
    grid_path: str,
    runs: int,
    seed: int,
    out_dir: str,
    k_equiv: float,
    column: str,
    poll: float,
    server: str | None,
) -> None:
    """Run a configuration grid and write the report files."""
    from .experiments import (
        BestSet,
        EquivalenceSet,
        ResultTable,
        emit_reports,
        parse_grid_file,
    )

    client = ApiClient(server)
    series = _load_series(client, data, synthetic, column, seed)

    try:
        with open(grid_path) as fh:
            configs = parse_grid_file(fh.read())
    except OSError as exc:
        raise ClientError(f"cannot read grid file: {exc}") from exc
    except ValueError as exc:
        raise ClientError(str(exc)) from exc

    job = client.post(
        "/grid",
        {
            "series": _series_payload(series),
            "labels": [cfg.label for cfg in configs],
            "runs": runs,
            "base_seed": seed,
            "k_equiv": k_equiv,
            "select": True,
        },
    )
    job_id = job["job_id"]
    while True:
        status = client.get(f"/grid/{job_id}")
        if status["status"] != "running":
            break
        time.sleep(poll)
    if status["status"] == "failed":
        raise ClientError(f"grid job failed: {status['error']}")

    result = status["result"]
    table = ResultTable.from_payload(result["table"])
    equiv = EquivalenceSet.from_payload(result["equiv"]) if result.get("equiv") else None
    best = BestSet.from_payload(result["best"]) if result.get("best") else None
    written = emit_reports(table, equiv, best, out_dir)

    if synthetic is not None:
        series_path = f"{out_dir}/series.csv"
        save_csv(series, series_path, column=column)
        written.append(series_path)
        if series.segment_ids is not None:
            seg_path = f"{out_dir}/segments.csv"
            save_segments_csv(series, seg_path)
            written.append(seg_path)

    click.echo(f"ran {len(table.rows)} configurations ({len(table.failures)} failed)")
    if equiv is not None:
        click.echo(
            f"equivalence set: {len(equiv.members)} members, "
            f"ref {equiv.ref_label!r} at {equiv.ref_error:.6f} (k={equiv.k})"
        )
    if best is not None:
        click.echo(f"best pairs: {len(best.pairs)}")
    for path in written:
        click.echo(f"wrote {path}")


@main.command("bounds")
@click.option("--data", type=click.Path(), default=None, help="Price CSV (Date + price column).")
@click.option("--synthetic", default=None, metavar="SPEC", help="Synthetic spec instead of --data.")
@click.option("--t0", default=None, type=int, help="First step (default 1).")
@click.option("--t1", default=None, type=int, help="Last step (default end of series).")
@click.option("--learner-ape", default=0.0, show_default=True, help="Learner APE to annotate.")
@click.option("--column", default="Close", show_default=True, help="Price column name in --data.")
@click.option("--seed", default=0, show_default=True, help="Seed for --synthetic.")
@server_option
def bounds_command(
    data: str | None,
    synthetic: str | None,
    t0: int | None,
    t1: int | None,
    learner_ape: float,
    column: str,
    seed: int,
    server: str | None,
) -> None:
    """Print the error-bound report for a series."""
    client = ApiClient(server)
    series = _load_series(client, data, synthetic, column, seed)
    payload = {
        "series": _series_payload(series),
        "t0": t0,
        "t1": t1,
        "learner_ape": learner_ape,
    }
    response = client.post("/bounds", payload)
    bounds = response["bounds"]
    click.echo(f"series {series.symbol}: steps {bounds['t_range'][0]}..{bounds['t_range'][1]}")
    click.echo(f"final avg abs move     {response['final_avg_abs_perc_error']:.6f}")
    click.echo(f"literal bounds         lower={bounds['lower_literal']:.6f} upper={bounds['upper_literal']:.6f}")
    click.echo(f"corrected bounds       lower={bounds['lower_corrected']:.6f} upper={bounds['upper_corrected']:.6f}")
    click.echo(f"learner APE            {bounds['learner_ape']:.6f}")


@main.command("calibrate")
@click.option("--repeats", default=5, show_default=True, help="Micro-benchmark repetitions.")
@click.option("--seed", default=0, show_default=True, help="Workload seed.")
@click.option("--json", "as_json", is_flag=True, help="Print machine-readable JSON.")
@server_option
def calibrate_command(repeats: int, seed: int, as_json: bool, server: str | None) -> None:
    """Micro-benchmark per-operation unit costs (for runtime estimates)."""
    client = ApiClient(server)
    costs = client.post("/calibrate", {"repeats": repeats, "seed": seed})
    if as_json:
        click.echo(json.dumps(costs, indent=2, sort_keys=True))
        return
    click.echo("learner      fit/instance (s)   predict (s)")
    for kind in sorted(costs["learn"]):
        click.echo(f"{kind:<12} {costs['learn'][kind]:>17.3e} {costs['predict'][kind]:>13.3e}")
    click.echo("detector     fill update (s)    detect update (s)")
    for kind in sorted(costs["dd_fill"]):
        click.echo(f"{kind:<12} {costs['dd_fill'][kind]:>17.3e} {costs['dd_detect'][kind]:>17.3e}")
    click.echo(f"log update   {costs['update']:.3e}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve_command(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("driftlab.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main(sys.argv[1:])
