"""Command-line front end.

Every subcommand is a thin client of the HTTP service: requests go through
the same endpoints whether the service runs in-process (the default, via
an ASGI transport) or remotely (``--server URL``). Exit codes: 0 success,
1 instability or a failed check, 2 configuration/parse errors.
"""

from __future__ import annotations

import asyncio
import os
import sys
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_UNSTABLE = 1
EXIT_PARSE = 2


class ServiceClient:
    """HTTP client for the service; in-process unless a base URL is given."""

    def __init__(self, server: str | None = None):
        self._server = server

    def _make_client(self) -> httpx.AsyncClient:
        if self._server:
            return httpx.AsyncClient(base_url=self._server, timeout=3600.0)
        from .service.app import create_app

        transport = httpx.ASGITransport(app=create_app())
        return httpx.AsyncClient(
            transport=transport, base_url="http://aoiq.internal", timeout=3600.0
        )

    def post(self, path: str, payload: dict) -> dict:
        async def request() -> httpx.Response:
            async with self._make_client() as client:
                return await client.post(path, json=payload)

        response = asyncio.run(request())
        if response.status_code == 422:
            _fail(response, EXIT_PARSE)
        if response.status_code == 409:
            _fail(response, EXIT_UNSTABLE)
        response.raise_for_status()
        return response.json()


def _fail(response: httpx.Response, code: int) -> None:
    detail = response.json().get("detail", {})
    message = detail.get("message", response.text) if isinstance(detail, dict) else str(detail)
    click.echo(f"error: {message}", err=True)
    if isinstance(detail, dict) and detail.get("rho") is not None:
        click.echo(f"offered load rho = {detail['rho']:.6g}", err=True)
    sys.exit(code)


def _scenario_payload(config, set_kv, seed, replications, horizon, raw_service_mean):
    text = ""
    if config is not None:
        text = Path(config).read_text()
    overrides: dict[str, str] = {}
    for item in set_kv:
        if "=" not in item:
            click.echo(f"error: --set expects key=value, got {item!r}", err=True)
            sys.exit(EXIT_PARSE)
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    if seed is not None:
        overrides["seed"] = str(seed)
    if replications is not None:
        overrides["replications"] = str(replications)
    if horizon is not None:
        overrides["horizon"] = str(horizon)
    if raw_service_mean:
        overrides["raw_service_mean"] = "true"
    return {"config": text, "overrides": overrides}


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def common_options(fn):
    fn = click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
                      help="Scenario file (key = value lines).")(fn)
    fn = click.option("--set", "set_kv", multiple=True, metavar="KEY=VALUE",
                      help="Override a scenario key; repeatable.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Master seed override.")(fn)
    fn = click.option("--replications", type=int, default=None,
                      help="Simulation replications override.")(fn)
    fn = click.option("--horizon", type=int, default=None,
                      help="Tagged-source deliveries per replication.")(fn)
    fn = click.option("--raw-service-mean", is_flag=True,
                      help="Treat service_mean as the raw service mean "
                           "(default: completion-time mean).")(fn)
    fn = click.option("--server", default=None, metavar="URL",
                      help="Remote service URL (default: run in-process).")(fn)
    return fn


@click.group()
def main():
    """Age-of-information toolkit for unreliable M/G/1 status-update queues."""


@main.command()
@common_options
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for analyze.csv.")
def analyze(config, set_kv, seed, replications, horizon, raw_service_mean, server, out):
    """Closed-form report for a single parameter point."""
    client = ServiceClient(server)
    payload = _scenario_payload(config, set_kv, seed, replications, horizon, raw_service_mean)
    rep = client.post("/analyze", payload)
    click.echo(render_analytic_text(rep))
    if out:
        directory = Path(out)
        directory.mkdir(parents=True, exist_ok=True)
        _atomic_write(directory / "analyze.csv", analytic_csv(rep))
        click.echo(f"wrote {directory / 'analyze.csv'}")


@main.command()
@common_options
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for simulate.csv.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None,
              help="Write the replication-0 event trace CSV here.")
def simulate(config, set_kv, seed, replications, horizon, raw_service_mean, server, out,
             trace_path):
    """Simulate a single parameter point and report estimates with CIs."""
    client = ServiceClient(server)
    payload = _scenario_payload(config, set_kv, seed, replications, horizon, raw_service_mean)
    payload["trace"] = trace_path is not None
    rep = client.post("/simulate", payload)
    click.echo(render_simulation_text(rep))
    if trace_path:
        rows = rep.get("trace") or []
        lines = ["time,event_type,source,queue_len,server_mode"]
        lines += [
            f"{r['time']:.9f},{r['event_type']},{r['source']},{r['queue_len']},{r['server_mode']}"
            for r in rows
        ]
        _atomic_write(Path(trace_path), "\n".join(lines) + "\n")
        suffix = " (truncated)" if rep.get("trace_truncated") else ""
        click.echo(f"wrote {trace_path}: {len(rows)} events{suffix}")
    if out:
        directory = Path(out)
        directory.mkdir(parents=True, exist_ok=True)
        _atomic_write(directory / "simulate.csv", simulation_csv(rep))
        click.echo(f"wrote {directory / 'simulate.csv'}")


@main.command()
@common_options
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for compare.csv (includes the variant verdict).")
def compare(config, set_kv, seed, replications, horizon, raw_service_mean, server, out):
    """Analytic vs simulation per point, with the formula-variant verdict."""
    client = ServiceClient(server)
    payload = _scenario_payload(config, set_kv, seed, replications, horizon, raw_service_mean)
    rep = client.post("/compare", payload)
    click.echo(render_compare_table(rep))
    if out:
        directory = Path(out)
        directory.mkdir(parents=True, exist_ok=True)
        _atomic_write(directory / "compare.csv", compare_csv(rep))
        click.echo(f"wrote {directory / 'compare.csv'}")


@main.command()
@common_options
@click.option("--out", type=click.Path(file_okay=False), default="sweeps",
              help="Output directory for per-(figure, distribution) CSVs.")
@click.option("--no-sim", is_flag=True, help="Skip simulation columns.")
def sweep(config, set_kv, seed, replications, horizon, raw_service_mean, server, out, no_sim):
    """Run the scenario sweep and write plot-ready CSV files."""
    client = ServiceClient(server)
    payload = _scenario_payload(config, set_kv, seed, replications, horizon, raw_service_mean)
    payload["include_simulation"] = not no_sim
    rep = client.post("/sweep", payload)
    directory = Path(out)
    directory.mkdir(parents=True, exist_ok=True)
    for f in rep["files"]:
        _atomic_write(directory / f["filename"], f["csv_text"])
        click.echo(f"wrote {directory / f['filename']}")


@main.command()
@click.option("--server", default=None, metavar="URL",
              help="Remote service URL (default: run in-process).")
def selfcheck(server):
    """Run the invariant suite of every module; exit 1 on any failure."""
    client = ServiceClient(server)
    rep = client.post("/selfcheck", {})
    for result in rep["results"]:
        mark = "PASS" if result["passed"] else "FAIL"
        click.echo(f"{mark}  {result['name']}: {result['detail']}")
    if not rep["all_passed"]:
        sys.exit(EXIT_UNSTABLE)
    click.echo("all checks passed")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("aoiq.service.app:app", host=host, port=port)


# --- rendering helpers -------------------------------------------------------


def render_analytic_text(rep: dict) -> str:
    lines = [
        f"sources: {rep['n_sources']}  total rate: {rep['total_rate']:.6g}  "
        f"alpha: {rep['alpha']:.6g}",
        f"service: {rep['service']}  repair: {rep['repair']}",
        f"rho: {rep['rho']:.9g}  p0: {rep['p0']:.9g}  availability: {rep['availability']:.9g}",
        f"completion mean: {rep['completion_mean']:.9g}  "
        f"second moment: {rep['completion_m2']:.9g}",
        f"mean waiting: {rep['mean_waiting']:.9g}  mean sojourn: {rep['mean_sojourn']:.9g}  "
        f"mean system size: {rep['mean_system_size']:.9g}",
        "",
        f"{'src':>4} {'lambda':>9} {'rho_k':>9} {'p_l':>11} {'delta_pooled':>13} "
        f"{'delta_per_src':>14}",
    ]
    for s in rep["per_source"]:
        lines.append(
            f"{s['source']:>4} {s['lam']:>9.4f} {s['rho_k']:>9.5f} {s['p_l']:>11.7f} "
            f"{s['delta_pooled']:>13.7f} {s['delta_per_source']:>14.7f}"
        )
    return "\n".join(lines)


def analytic_csv(rep: dict) -> str:
    header = (
        "source,lambda,rho_k,p_b,p_l,w_star,w_star_d1,w_star_d2,"
        "residual_term,other_work_term,departed_term,prev_sojourn_term,gap_square_term,"
        "e_xw,delta_pooled,delta_per_source,p0,availability,rho,"
        "mean_waiting,mean_sojourn"
    )
    lines = [header]
    for s in rep["per_source"]:
        cells = [
            str(s["source"]),
            *(format(s[k], ".9g") for k in (
                "lam", "rho_k", "p_b", "p_l", "w_star", "w_star_d1", "w_star_d2",
                "residual_term", "other_work_term", "departed_term",
                "prev_sojourn_term", "gap_square_term", "e_xw",
                "delta_pooled", "delta_per_source",
            )),
            *(format(rep[k], ".9g") for k in (
                "p0", "availability", "rho", "mean_waiting", "mean_sojourn",
            )),
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _est(e: dict, digits: int = 6) -> str:
    if e.get("mean") is None:
        return "n/a"
    if e.get("ci95") is None:
        return f"{e['mean']:.{digits}f}"
    return f"{e['mean']:.{digits}f} ±{e['ci95']:.{digits}f}"


def render_simulation_text(rep: dict) -> str:
    lines = [
        f"replications: {rep['replications']}  seed: {rep['master_seed']}  "
        f"stable: {rep['stable']}",
        f"idle fraction: {_est(rep['idle_fraction'])}  "
        f"availability: {_est(rep['availability_fraction'])}  "
        f"mean system size: {_est(rep['mean_system_size'])}",
        "pgf samples: "
        + "  ".join(f"Q({p['z']:.2f})={_est(p['value'])}" for p in rep["pgf"]),
        f"total deliveries: {rep['total_deliveries']}  "
        f"sojourn identity error: {rep['identity_error_max']:.2e}",
        "",
        f"{'src':>4} {'aaoi':>22} {'mean sojourn':>20} {'p_l':>18} {'deliveries':>11}",
    ]
    for s in rep["per_source"]:
        lines.append(
            f"{s['source']:>4} {_est(s['aaoi']):>22} {_est(s['mean_sojourn']):>20} "
            f"{_est(s['p_l']):>18} {s['deliveries']:>11}"
        )
    return "\n".join(lines)


def simulation_csv(rep: dict) -> str:
    header = (
        "source,aaoi_mean,aaoi_ci95,aaoi_cycle_mean,mean_sojourn,mean_waiting,"
        "p_l,e_xw,deliveries,arrivals,idle_fraction,availability_fraction,"
        "mean_system_size,replications,seed,stable"
    )

    def opt(v) -> str:
        return "" if v is None else format(v, ".9g")

    lines = [header]
    for s in rep["per_source"]:
        lines.append(
            ",".join(
                [
                    str(s["source"]),
                    opt(s["aaoi"]["mean"]),
                    opt(s["aaoi"]["ci95"]),
                    opt(s["aaoi_cycle"]["mean"]),
                    opt(s["mean_sojourn"]["mean"]),
                    opt(s["mean_waiting"]["mean"]),
                    opt(s["p_l"]["mean"]),
                    opt(s["e_xw"]["mean"]),
                    str(s["deliveries"]),
                    str(s["arrivals"]),
                    opt(rep["idle_fraction"]["mean"]),
                    opt(rep["availability_fraction"]["mean"]),
                    opt(rep["mean_system_size"]["mean"]),
                    str(rep["replications"]),
                    str(rep["master_seed"]),
                    "true" if rep["stable"] else "false",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def render_compare_table(rep: dict) -> str:
    head = (
        f"{'dist':>9} {'N':>2} {'x':>9} {'sim mean':>10} {'ci95':>9} "
        f"{'pooled':>10} {'z':>8} {'per_src':>10} {'z':>8} {'baseline':>10}"
    )
    lines = [head, "-" * len(head)]
    for p in rep["points"]:
        x = "" if p["sweep_value"] is None else f"{p['sweep_value']:.4f}"
        if p["stable"]:
            lines.append(
                f"{p['service_dist']:>9} {p['n_sources']:>2} {x:>9} "
                f"{p['sim_mean']:>10.6f} {p['sim_ci95'] or 0:>9.6f} "
                f"{p['delta_pooled']:>10.6f} {p['z_pooled'] or 0:>8.2f} "
                f"{p['delta_per_source']:>10.6f} {p['z_per_source'] or 0:>8.2f} "
                f"{p['delta_baseline']:>10.6f}"
            )
        else:
            lines.append(
                f"{p['service_dist']:>9} {p['n_sources']:>2} {x:>9} "
                f"{p['sim_mean']:>10.6f} {'':>9} {'unstable':>52}"
            )
    lines.append(rep["verdict_line"].lstrip("# "))
    return "\n".join(lines)


def compare_csv(rep: dict) -> str:
    header = (
        "figure,service_dist,n_sources,sweep_var,sweep_value,"
        "delta_pooled,delta_per_source,delta_baseline,"
        "sim_mean,sim_ci95,z_pooled,z_per_source,"
        "covered_pooled,covered_per_source,stable_flag"
    )

    def cell(v) -> str:
        if v is None:
            return ""
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return format(v, ".9g")
        return str(v)

    lines = [header]
    for p in rep["points"]:
        lines.append(
            ",".join(
                cell(p[k])
                for k in (
                    "figure", "service_dist", "n_sources", "sweep_var", "sweep_value",
                    "delta_pooled", "delta_per_source", "delta_baseline",
                    "sim_mean", "sim_ci95", "z_pooled", "z_per_source",
                    "covered_pooled", "covered_per_source", "stable",
                )
            )
        )
    lines.append(rep["verdict_line"])
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    main()
