"""Sweep execution and the plot-ready CSV schema.

One CSV file per (figure, service distribution); within a file, one row
per (sweep point, source count, formula variant), ordered by grid value,
then source count, then variant. Numeric cells carry 9 significant
digits; unstable points leave the analytic cells empty and set
stable_flag=false. All delta/p_l/sojourn columns refer to source 1, the
tagged source of the figures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from . import aoi, transforms
from .des import SimConfig, SimulationReport, run_experiment
from .scenario import Scenario, SweepPoint

CSV_HEADER = (
    "sweep_var,sweep_value,n_sources,service_dist,variant,"
    "delta_analytic,delta_baseline,delta_sim_mean,delta_sim_ci95,"
    "p0,p_a,p_l_analytic,p_l_sim,mean_sojourn_analytic,mean_sojourn_sim,stable_flag"
)

VARIANTS = ("pooled", "per_source")


@dataclass(frozen=True)
class CsvRow:
    sweep_var: str
    sweep_value: float | None
    n_sources: int
    service_dist: str
    variant: str
    delta_analytic: float | None
    delta_baseline: float | None
    delta_sim_mean: float | None
    delta_sim_ci95: float | None
    p0: float | None
    p_a: float | None
    p_l_analytic: float | None
    p_l_sim: float | None
    mean_sojourn_analytic: float | None
    mean_sojourn_sim: float | None
    stable_flag: bool


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and math.isnan(value):
        return ""
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def render_csv(rows: list[CsvRow]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join(_fmt(getattr(row, f.name)) for f in fields(CsvRow)))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[CsvRow]:
    """Round-trip reader for the sweep schema; skips '#' comment lines."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unrecognized sweep CSV header")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(fields(CsvRow)):
            raise ValueError(f"malformed sweep CSV row: {ln!r}")

        def opt(cell: str) -> float | None:
            return None if cell == "" else float(cell)

        rows.append(
            CsvRow(
                sweep_var=cells[0],
                sweep_value=opt(cells[1]),
                n_sources=int(cells[2]),
                service_dist=cells[3],
                variant=cells[4],
                delta_analytic=opt(cells[5]),
                delta_baseline=opt(cells[6]),
                delta_sim_mean=opt(cells[7]),
                delta_sim_ci95=opt(cells[8]),
                p0=opt(cells[9]),
                p_a=opt(cells[10]),
                p_l_analytic=opt(cells[11]),
                p_l_sim=opt(cells[12]),
                mean_sojourn_analytic=opt(cells[13]),
                mean_sojourn_sim=opt(cells[14]),
                stable_flag=cells[15] == "true",
            )
        )
    return rows


def simulate_point(point: SweepPoint, scenario: Scenario) -> SimulationReport:
    cfg = SimConfig(
        params=point.params,
        horizon_deliveries=scenario.horizon_deliveries,
        horizon_time=scenario.horizon_time,
        warmup_fraction=scenario.warmup,
        replications=scenario.replications,
        master_seed=scenario.seed,
    )
    return run_experiment(cfg, keep_replications=False)


def point_rows(point: SweepPoint, sim: SimulationReport | None) -> list[CsvRow]:
    """Both variant rows for one sweep point."""
    stable = point.stable
    if stable:
        delta_pooled, delta_per_source = aoi.aaoi_source(point.params, 1)
        base = aoi.baseline_aaoi(point.params).source(1)
        p0 = transforms.idle_prob(point.params)
        p_a = transforms.availability(point.params)
        p_l = aoi.event_probs(point.params, 1).p_l
        sojourn = transforms.mean_sojourn(point.params)
        analytic = {
            "pooled": (delta_pooled, base.delta_pooled),
            "per_source": (delta_per_source, base.delta_per_source),
        }
    else:
        p0 = p_a = p_l = sojourn = None
        analytic = {v: (None, None) for v in VARIANTS}

    sim_delta = sim_ci = sim_pl = sim_sojourn = None
    if sim is not None:
        s = sim.source(1)
        sim_delta = s.aaoi.mean
        sim_ci = s.aaoi.ci95
        sim_pl = s.p_l.mean
        sim_sojourn = s.mean_sojourn.mean

    rows = []
    for variant in VARIANTS:
        delta, delta_base = analytic[variant]
        rows.append(
            CsvRow(
                sweep_var=point.sweep_var or "none",
                sweep_value=point.x_value,
                n_sources=point.n_sources,
                service_dist=point.dist_label,
                variant=variant,
                delta_analytic=delta,
                delta_baseline=delta_base,
                delta_sim_mean=sim_delta,
                delta_sim_ci95=sim_ci,
                p0=p0,
                p_a=p_a,
                p_l_analytic=p_l,
                p_l_sim=sim_pl,
                mean_sojourn_analytic=sojourn,
                mean_sojourn_sim=sim_sojourn,
                stable_flag=stable,
            )
        )
    return rows


@dataclass(frozen=True)
class SweepFile:
    figure: str
    distribution: str
    filename: str
    csv_text: str


def run_sweep(scenario: Scenario, include_simulation: bool = True) -> list[SweepFile]:
    """Evaluate every point and render one CSV per (figure, distribution).

    Rows are ordered by grid position, then source count, then variant;
    note the fig6b x-column (availability) decreases along its grid.
    """
    grouped: dict[str, list[tuple[tuple, list[CsvRow]]]] = {}
    for point in scenario.points():
        sim = simulate_point(point, scenario) if include_simulation else None
        key = (
            point.grid_value if point.grid_value is not None else 0.0,
            point.n_sources,
        )
        grouped.setdefault(point.dist_label, []).append((key, point_rows(point, sim)))
    files = []
    for dist_label, entries in grouped.items():
        entries.sort(key=lambda e: e[0])
        rows = [row for _, point_rs in entries for row in point_rs]
        files.append(
            SweepFile(
                figure=scenario.figure,
                distribution=dist_label,
                filename=f"{scenario.figure}_{dist_label}.csv",
                csv_text=render_csv(rows),
            )
        )
    return files
