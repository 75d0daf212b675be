"""Analytic-versus-simulation comparison and the formula-variant verdict.

For every point: both formula variants, the no-failure baseline, the
simulated mean with its confidence interval, and z-scores of each variant
against the simulation. The footer names the variant with the smaller
aggregate |z| and reports per-variant CI coverage, which is the evidence
deciding between the two readings of the multi-source combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import aoi
from .scenario import Scenario
from .sweeps import simulate_point

COMPARE_HEADER = (
    "figure,service_dist,n_sources,sweep_var,sweep_value,"
    "delta_pooled,delta_per_source,delta_baseline,"
    "sim_mean,sim_ci95,z_pooled,z_per_source,"
    "covered_pooled,covered_per_source,stable_flag"
)


@dataclass(frozen=True)
class ComparePoint:
    figure: str
    service_dist: str
    n_sources: int
    sweep_var: str
    sweep_value: float | None
    delta_pooled: float | None
    delta_per_source: float | None
    delta_baseline: float | None
    sim_mean: float
    sim_ci95: float | None
    z_pooled: float | None
    z_per_source: float | None
    covered_pooled: bool | None
    covered_per_source: bool | None
    stable: bool


@dataclass(frozen=True)
class CompareReport:
    points: tuple[ComparePoint, ...]
    aggregate_abs_z_pooled: float
    aggregate_abs_z_per_source: float
    coverage_pooled: float
    coverage_per_source: float
    verdict: str  # variant with the smaller aggregate |z|

    @property
    def verdict_line(self) -> str:
        return (
            f"# variant_verdict: {self.verdict} "
            f"(aggregate |z| {self.aggregate_abs_z_pooled:.3f} pooled "
            f"vs {self.aggregate_abs_z_per_source:.3f} per_source; "
            f"CI coverage {self.coverage_pooled:.0%} vs {self.coverage_per_source:.0%})"
        )


def run_compare(scenario: Scenario) -> CompareReport:
    points = []
    zs_pooled, zs_per_source = [], []
    cov_pooled, cov_per_source = [], []
    for point in scenario.points():
        sim = simulate_point(point, scenario)
        s1 = sim.source(1)
        if point.stable:
            d_pooled, d_per_source = aoi.aaoi_source(point.params, 1)
            base = aoi.baseline_aaoi(point.params).source(1).delta_pooled
            z_pooled = s1.aaoi.z_score(d_pooled) if s1.aaoi.se else None
            z_per_source = s1.aaoi.z_score(d_per_source) if s1.aaoi.se else None
            c_pooled = s1.aaoi.covers(d_pooled) if s1.aaoi.ci95 is not None else None
            c_per_source = (
                s1.aaoi.covers(d_per_source) if s1.aaoi.ci95 is not None else None
            )
            if z_pooled is not None:
                zs_pooled.append(abs(z_pooled))
                zs_per_source.append(abs(z_per_source))
            if c_pooled is not None:
                cov_pooled.append(c_pooled)
                cov_per_source.append(c_per_source)
        else:
            d_pooled = d_per_source = base = z_pooled = z_per_source = None
            c_pooled = c_per_source = None
        points.append(
            ComparePoint(
                figure=point.figure,
                service_dist=point.dist_label,
                n_sources=point.n_sources,
                sweep_var=point.sweep_var or "none",
                sweep_value=point.x_value,
                delta_pooled=d_pooled,
                delta_per_source=d_per_source,
                delta_baseline=base,
                sim_mean=s1.aaoi.mean,
                sim_ci95=s1.aaoi.ci95,
                z_pooled=z_pooled,
                z_per_source=z_per_source,
                covered_pooled=c_pooled,
                covered_per_source=c_per_source,
                stable=point.stable,
            )
        )
    agg_pooled = float(sum(zs_pooled) / len(zs_pooled)) if zs_pooled else math.nan
    agg_per_source = (
        float(sum(zs_per_source) / len(zs_per_source)) if zs_per_source else math.nan
    )
    verdict = "per_source" if agg_per_source < agg_pooled else "pooled"
    return CompareReport(
        points=tuple(points),
        aggregate_abs_z_pooled=agg_pooled,
        aggregate_abs_z_per_source=agg_per_source,
        coverage_pooled=float(sum(cov_pooled) / len(cov_pooled)) if cov_pooled else math.nan,
        coverage_per_source=(
            float(sum(cov_per_source) / len(cov_per_source)) if cov_per_source else math.nan
        ),
        verdict=verdict,
    )


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def render_compare_csv(report: CompareReport) -> str:
    """CSV artifact with the verdict recorded as a trailing comment line."""
    lines = [COMPARE_HEADER]
    for p in report.points:
        lines.append(
            ",".join(
                _cell(v)
                for v in (
                    p.figure,
                    p.service_dist,
                    p.n_sources,
                    p.sweep_var,
                    p.sweep_value,
                    p.delta_pooled,
                    p.delta_per_source,
                    p.delta_baseline,
                    p.sim_mean,
                    p.sim_ci95,
                    p.z_pooled,
                    p.z_per_source,
                    p.covered_pooled,
                    p.covered_per_source,
                    p.stable,
                )
            )
        )
    lines.append(report.verdict_line)
    return "\n".join(lines) + "\n"


def render_compare_text(report: CompareReport) -> str:
    head = (
        f"{'dist':>9} {'N':>2} {'x':>9} {'sim mean':>10} {'ci95':>9} "
        f"{'pooled':>10} {'z':>7} {'per_src':>10} {'z':>7} {'baseline':>10}"
    )
    lines = [head, "-" * len(head)]
    for p in report.points:
        if p.stable:
            lines.append(
                f"{p.service_dist:>9} {p.n_sources:>2} {_num(p.sweep_value):>9} "
                f"{p.sim_mean:>10.6f} {_num(p.sim_ci95):>9} "
                f"{p.delta_pooled:>10.6f} {_num(p.z_pooled, 2):>7} "
                f"{p.delta_per_source:>10.6f} {_num(p.z_per_source, 2):>7} "
                f"{p.delta_baseline:>10.6f}"
            )
        else:
            lines.append(
                f"{p.service_dist:>9} {p.n_sources:>2} {_num(p.sweep_value):>9} "
                f"{p.sim_mean:>10.6f} {_num(p.sim_ci95):>9} {'unstable':>58}"
            )
    lines.append(report.verdict_line.lstrip("# "))
    return "\n".join(lines) + "\n"


def _num(v, digits: int = 4) -> str:
    return "" if v is None else format(v, f".{digits}f")
