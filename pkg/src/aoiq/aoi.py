"""Closed-form per-source average age of information.

The average AoI of a tagged source k decomposes over the sign of
(inter-arrival minus previous sojourn): event "b" when the previous packet
of the same source is still in the system at the new arrival, "l" when it
has already left. The three conditional cross-moment terms reduce to the
sojourn LST and its first two derivatives evaluated at the source's own
arrival rate, with the other sources entering only through their combined
load.

Two readings of the multi-source combination are always computed. The
pooled form treats every other source as one aggregate load multiplying
transforms at the tagged source's rate; the per-source form keeps each
other source's correction at its own rate. They coincide when the other
sources share the tagged rate; otherwise the simulator adjudicates (the
`compare` command reports both with z-scores).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import transforms
from .system import SystemParams


@dataclass(frozen=True)
class EventProbs:
    """P(previous same-source packet still in system / already departed)."""

    p_b: float
    p_l: float


@dataclass(frozen=True)
class CrossTerms:
    """Conditional cross-moments of inter-arrival and waiting components.

    With X the tagged inter-arrival and T the previous packet's sojourn:
    `residual_term` is E[(T - X) X | prior in system], which splits exactly
    into `prev_sojourn_term` (E[T X | prior in system]) minus
    `gap_square_term` (E[X^2 | prior in system]); `other_work_term` is the
    other-source work arriving within X; `departed_term` is the
    prior-departed branch's cross-moment.
    """

    residual_term: float
    other_work_term: float
    departed_term: float
    prev_sojourn_term: float
    gap_square_term: float


@dataclass(frozen=True)
class SourceAaoi:
    source: int
    delta_pooled: float
    delta_per_source: float
    w_star: float
    w_star_d1: float


@dataclass(frozen=True)
class AaoiResult:
    """Per-source AAoI under both readings plus the shared scalars used."""

    mean_waiting: float
    completion_mean: float
    per_source: tuple[SourceAaoi, ...]

    def source(self, source: int) -> SourceAaoi:
        return self.per_source[source - 1]


def event_probs(params: SystemParams, source: int) -> EventProbs:
    """Event probabilities for the tagged source.

    p_l = S*(h(lam_k)) * lam_k * p0 / (lam_k - lam*(1 - S*(h(lam_k)))),
    which is the sojourn LST evaluated at lam_k: the chance an exponential
    inter-arrival outlives the previous packet's sojourn.
    """
    lam_k = params.rate_of(source)
    cm = transforms.require_stable(params)
    p0 = 1.0 - cm.rho
    k = transforms.completion_lst(params, lam_k)
    p_l = k * lam_k * p0 / (lam_k - params.total_rate * (1.0 - k))
    return EventProbs(p_b=1.0 - p_l, p_l=p_l)


def _other_load(params: SystemParams, source: int, eH: float) -> float:
    return (params.total_rate - params.rate_of(source)) * eH


def cross_terms(params: SystemParams, source: int) -> CrossTerms:
    """The three conditional cross-moment terms for the tagged source."""
    lam_k = params.rate_of(source)
    cm = transforms.require_stable(params)
    ew = transforms.mean_waiting(params)
    et = ew + cm.eH
    w0 = transforms.sojourn_lst(params, lam_k)
    w1 = transforms.sojourn_lst_deriv(params, lam_k, 1)
    w2 = transforms.sojourn_lst_deriv(params, lam_k, 2)
    probs = event_probs(params, source)
    rho_o = _other_load(params, source, cm.eH)

    residual = (ew + cm.eH - w1 + (2.0 * w0 - 2.0) / lam_k) / (lam_k * probs.p_b)
    other_work = (rho_o / probs.p_b) * (
        2.0 / lam_k**2 - w2 + 2.0 * w1 / lam_k - 2.0 * w0 / lam_k**2
    )
    departed = (rho_o / probs.p_l) * (w2 - w1 / lam_k)
    prev_sojourn = (et / lam_k + w1 / lam_k - w2) / probs.p_b
    gap_square = (2.0 / lam_k**2 - w2 + 2.0 * w1 / lam_k - 2.0 * w0 / lam_k**2) / probs.p_b
    return CrossTerms(
        residual_term=residual,
        other_work_term=other_work,
        departed_term=departed,
        prev_sojourn_term=prev_sojourn,
        gap_square_term=gap_square,
    )


def expected_xw(params: SystemParams, source: int) -> float:
    """E[X * W] for the tagged source: the event-weighted sum of the terms."""
    probs = event_probs(params, source)
    terms = cross_terms(params, source)
    return probs.p_b * (terms.residual_term + terms.other_work_term) + (
        probs.p_l * terms.departed_term
    )


def aaoi_source(params: SystemParams, source: int) -> tuple[float, float]:
    """(delta_pooled, delta_per_source) for one source.

    Pooled form: EW + 2*EH + (2*rho_o - 1)/lam_k
    + 2*(1 - rho_o)*W*(lam_k)/lam_k + (rho_o - 1)*W*'(lam_k), with rho_o the
    combined other-source load. The per-source form moves the rho_o terms
    into a sum with transforms at each other source's own rate.
    """
    result = aaoi_all(params)
    entry = result.source(source)
    return entry.delta_pooled, entry.delta_per_source


def aaoi_all(params: SystemParams) -> AaoiResult:
    """AAoI of every source, sharing the transform evaluations per rate."""
    cm = transforms.require_stable(params)
    ew = transforms.mean_waiting(params)
    w_cache: dict[float, tuple[float, float]] = {}

    def w_at(lam: float) -> tuple[float, float]:
        if lam not in w_cache:
            w_cache[lam] = (
                transforms.sojourn_lst(params, lam),
                transforms.sojourn_lst_deriv(params, lam, 1),
            )
        return w_cache[lam]

    entries = []
    for k in range(1, params.n_sources + 1):
        lam_k = params.rate_of(k)
        w0, w1 = w_at(lam_k)
        rho_o = _other_load(params, k, cm.eH)
        delta_pooled = (
            ew
            + 2.0 * cm.eH
            + (2.0 * rho_o - 1.0) / lam_k
            + 2.0 * (1.0 - rho_o) * w0 / lam_k
            + (rho_o - 1.0) * w1
        )
        other_sum = 0.0
        for j in range(1, params.n_sources + 1):
            if j == k:
                continue
            lam_j = params.rate_of(j)
            w0_j, w1_j = w_at(lam_j)
            other_sum += lam_j * cm.eH * (2.0 / lam_j + w1_j - 2.0 * w0_j / lam_j)
        delta_per_source = (
            ew + 2.0 * cm.eH + 2.0 * w0 / lam_k - w1 - 1.0 / lam_k + other_sum
        )
        entries.append(
            SourceAaoi(
                source=k,
                delta_pooled=delta_pooled,
                delta_per_source=delta_per_source,
                w_star=w0,
                w_star_d1=w1,
            )
        )
    return AaoiResult(mean_waiting=ew, completion_mean=cm.eH, per_source=tuple(entries))


def baseline_aaoi(params: SystemParams) -> AaoiResult:
    """AAoI with the failure mechanism switched off (alpha = 0), same laws."""
    return aaoi_all(params.with_alpha(0.0))
