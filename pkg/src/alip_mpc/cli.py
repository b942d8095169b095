"""Command-line client for the gait-simulation service.

Commands talk to the HTTP service: in-process by default, or to a running
server via --server.  CSV content is passed through verbatim, so files
written here are byte-identical to the simulator's output.

Exit codes: 0 clean run, 1 usage/parse error, 2 terminal event.
"""
from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path
from typing import Optional

import click
import httpx
import yaml

from .errors import ScenarioError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TERMINAL = 2


class ServiceClient:
    """Thin HTTP client; runs the ASGI app in-process unless given a URL."""

    def __init__(self, server: Optional[str] = None):
        self._server = server

    def post(self, path: str, payload: dict) -> dict:
        if self._server:
            with httpx.Client(base_url=self._server, timeout=600.0) as client:
                resp = client.post(path, json=payload)
        else:
            resp = asyncio.run(self._post_inprocess(path, payload))
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise ScenarioError(f"service error ({resp.status_code}): {detail}")
        return resp.json()

    async def _post_inprocess(self, path: str, payload: dict) -> httpx.Response:
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://alip-mpc", timeout=600.0
        ) as client:
            return await client.post(path, json=payload)


def _load_scenario_dict(path: str) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: scenario file must hold a mapping")
    return data


def _apply_overrides(data: dict, plant: Optional[str], horizon: Optional[int]) -> dict:
    if plant is not None:
        kind = {"alip": "alip", "exact": "exact-pre", "exact-pre": "exact-pre"}.get(plant)
        if kind is None:
            raise ScenarioError(f"unknown plant {plant!r}; use alip or exact")
        data.setdefault("plant", {})["kind"] = kind
    if horizon is not None:
        if horizon < 1:
            raise ScenarioError(f"horizon must be >= 1, got {horizon}")
        data.setdefault("controller", {})["N_s"] = horizon
    return data


def _write_run(out: Path, run: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "log.csv").write_bytes(run["csv"].encode())
    (out / "events.json").write_text(json.dumps(run["events"], indent=2) + "\n")
    (out / "summary.json").write_text(json.dumps(run["summary"], indent=2) + "\n")


def _echo_summary(summary: dict) -> None:
    click.echo(
        f"{summary['name'] or 'scenario'}: {summary['steps_completed']} steps, "
        f"{summary['rows']} samples"
        + (", TRUNCATED" if summary["truncated"] else "")
    )
    counts = summary["event_counts"]
    if counts:
        click.echo("events: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    else:
        click.echo("events: none")


@click.group()
def cli() -> None:
    """Foot-placement MPC gait simulator."""


@cli.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--plant", type=str, default=None, help="override plant: alip | exact")
@click.option("--horizon", type=int, default=None, help="override N_s")
@click.option("--server", type=str, default=None, help="remote service URL")
def simulate(scenario_path, out_dir, plant, horizon, server) -> None:
    """Run one scenario and write log.csv, events.json, summary.json."""
    data = _apply_overrides(_load_scenario_dict(scenario_path), plant, horizon)
    result = ServiceClient(server).post("/simulate", {"scenario": data})
    _write_run(Path(out_dir), result)
    _echo_summary(result["summary"])
    if result["summary"]["terminal_event"]:
        ev = result["summary"]["terminal_event"]
        click.echo(f"terminal event: {ev['kind']} at t={ev['t']:.3f} ({ev['detail']})")
        sys.exit(EXIT_TERMINAL)


@cli.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--state", type=str, default=None, help="x_c,y_c,L_x,L_y")
@click.option("--remaining", type=float, default=None, help="time to impact [s]")
@click.option("--stance", type=click.Choice(["left", "right"]), default=None)
@click.option("--json", "as_json", is_flag=True, help="print the raw response")
@click.option("--server", type=str, default=None)
def plan(scenario_path, state, remaining, stance, as_json, server) -> None:
    """Solve a single foot-placement QP and print the plan."""
    payload: dict = {"scenario": _load_scenario_dict(scenario_path)}
    if state is not None:
        parts = state.split(",")
        if len(parts) != 4:
            raise ScenarioError(f"--state needs 4 comma-separated values, got {state!r}")
        payload["state"] = [float(p) for p in parts]
    if remaining is not None:
        payload["time_remaining"] = remaining
    if stance is not None:
        payload["stance"] = stance
    result = ServiceClient(server).post("/plan", payload)
    if as_json:
        click.echo(json.dumps(result, indent=2))
        return
    click.echo(f"status: {result['status']} ({result['iterations']} iterations)")
    click.echo("x0 (predicted pre-impact): "
               + " ".join(f"{v:+.6f}" for v in result["x0"]))
    click.echo(f"u_first: ({result['u_first'][0]:+.6f}, {result['u_first'][1]:+.6f})")
    for j, u in enumerate(result["u_sequence"]):
        click.echo(f"  u[{j}] = ({u[0]:+.6f}, {u[1]:+.6f})")
    if result["active_rows"]:
        click.echo("active: " + "; ".join(result["active_rows"]))
    if result["violated_rows"]:
        click.echo("violated: " + "; ".join(result["violated_rows"]))
    r = result["kkt_residuals"]
    click.echo(
        f"KKT residuals: primal={r['primal']:.2e} dual={r['dual']:.2e} "
        f"comp={r['complementarity']:.2e}"
    )


@cli.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@click.option("--server", type=str, default=None)
def gains(scenario_path, as_json, server) -> None:
    """Print the step dynamics pair and the Riccati terminal weight."""
    payload = {"scenario": _load_scenario_dict(scenario_path)}
    result = ServiceClient(server).post("/gains", payload)
    if as_json:
        click.echo(json.dumps(result, indent=2))
        return

    def show(name, M):
        click.echo(f"{name} =")
        for row in M:
            click.echo("  " + "  ".join(f"{v:+12.6f}" for v in row))

    show("A_d", result["A_d"])
    show("B_d", result["B_d"])
    show("Q_f", result["Q_f"])
    click.echo(f"DARE residual: {result['dare_residual']:.3e}")
    click.echo(f"natural frequency: {result['natural_frequency']:.6f} 1/s")


@cli.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--horizons", required=True, type=str, help="comma list, e.g. 2,4,8")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--server", type=str, default=None)
def sweep(scenario_path, horizons, out_dir, server) -> None:
    """Run the scenario once per horizon and write per-horizon outputs."""
    try:
        hs = [int(h) for h in horizons.split(",") if h.strip()]
    except ValueError as exc:
        raise ScenarioError(f"bad --horizons {horizons!r}: {exc}") from exc
    if not hs:
        raise ScenarioError("--horizons must name at least one horizon")
    payload = {"scenario": _load_scenario_dict(scenario_path), "horizons": hs}
    result = ServiceClient(server).post("/sweep", payload)
    out = Path(out_dir)
    terminal = False
    for run in result["runs"]:
        _write_run(out / f"horizon_{run['horizon']}", run)
        click.echo(f"-- horizon {run['horizon']} --")
        _echo_summary(run["summary"])
        terminal = terminal or bool(run["summary"]["terminal_event"])
    if terminal:
        sys.exit(EXIT_TERMINAL)


@cli.command()
def scenarios() -> None:
    """List the bundled scenario files."""
    from .scenarios import bundled_scenario_paths

    for p in bundled_scenario_paths():
        click.echo(f"{p.stem:30s} {p}")


@cli.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except (ScenarioError, httpx.HTTPError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except SystemExit:
        raise


if __name__ == "__main__":
    main()
