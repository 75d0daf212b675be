"""Assembled closed-form report for one parameter set."""

from __future__ import annotations

from dataclasses import dataclass

from . import aoi, transforms
from .system import SystemParams


@dataclass(frozen=True)
class SourceAnalytics:
    """All per-source closed-form quantities."""

    source: int
    lam: float
    rho_k: float
    p_b: float
    p_l: float
    w_star: float
    w_star_d1: float
    w_star_d2: float
    residual_term: float
    other_work_term: float
    departed_term: float
    prev_sojourn_term: float
    gap_square_term: float
    e_xw: float
    delta_pooled: float
    delta_per_source: float


@dataclass(frozen=True)
class AnalyticReport:
    """Closed-form outputs for one stable parameter set."""

    n_sources: int
    total_rate: float
    alpha: float
    service_literal: str
    repair_literal: str
    rho: float
    p0: float
    availability: float
    completion_mean: float
    completion_m2: float
    mean_waiting: float
    mean_sojourn: float
    mean_system_size: float
    per_source: tuple[SourceAnalytics, ...]

    def source(self, source: int) -> SourceAnalytics:
        return self.per_source[source - 1]


def analytic_report(params: SystemParams) -> AnalyticReport:
    """Evaluate every closed-form quantity; raises StabilityError if rho >= 1."""
    cm = transforms.require_stable(params)
    service, repair = params.shared_laws()
    aaoi = aoi.aaoi_all(params)
    rows = []
    for k in range(1, params.n_sources + 1):
        lam_k = params.rate_of(k)
        probs = aoi.event_probs(params, k)
        terms = aoi.cross_terms(params, k)
        entry = aaoi.source(k)
        rows.append(
            SourceAnalytics(
                source=k,
                lam=lam_k,
                rho_k=lam_k * cm.eH,
                p_b=probs.p_b,
                p_l=probs.p_l,
                w_star=entry.w_star,
                w_star_d1=entry.w_star_d1,
                w_star_d2=transforms.sojourn_lst_deriv(params, lam_k, 2),
                residual_term=terms.residual_term,
                other_work_term=terms.other_work_term,
                departed_term=terms.departed_term,
                prev_sojourn_term=terms.prev_sojourn_term,
                gap_square_term=terms.gap_square_term,
                e_xw=probs.p_b * (terms.residual_term + terms.other_work_term)
                + probs.p_l * terms.departed_term,
                delta_pooled=entry.delta_pooled,
                delta_per_source=entry.delta_per_source,
            )
        )
    return AnalyticReport(
        n_sources=params.n_sources,
        total_rate=params.total_rate,
        alpha=params.alpha,
        service_literal=service.literal(),
        repair_literal=repair.literal(),
        rho=cm.rho,
        p0=transforms.idle_prob(params),
        availability=transforms.availability(params),
        completion_mean=cm.eH,
        completion_m2=cm.eH2,
        mean_waiting=aaoi.mean_waiting,
        mean_sojourn=aaoi.mean_waiting + cm.eH,
        mean_system_size=transforms.mean_system_size(params),
        per_source=tuple(rows),
    )
