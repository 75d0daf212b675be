"""Runtime invariant suite behind the `selfcheck` subcommand and endpoint.

Each check is small, deterministic (fixed seeds), and verifies one
documented property of a module: transform derivatives against finite
differences, distribution moments and sampling laws, the closed-form
identities of the age formula, and the simulator's structural contracts.
Simulation-backed checks use a 4-sigma band so that a healthy build never
flickers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from . import aoi, transforms
from .dists import (
    Deterministic,
    Erlang,
    Exponential,
    HyperExp2,
    make_h2_balanced,
    scv,
    with_mean,
)
from .des import SimConfig, run_experiment, run_replication
from .numdiff import backward_derivative_at_one, central_derivative
from .system import SystemParams


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


_SPECS = [
    Exponential(2.0),
    Erlang(2, 4.0),
    Erlang(3, 5.0),
    HyperExp2(0.7, 2.8, 1.2),
    Deterministic(0.5),
]

_B1 = 0.5 / 1.03
_PRESET_PARAMS = [
    SystemParams((0.3, 0.12), Erlang(2, 2 / _B1), Exponential(1 / 0.3), alpha=0.1),
    SystemParams((0.9, 0.12, 0.12, 0.12), make_h2_balanced(_B1, 0.7), Exponential(1 / 0.3), alpha=0.1),
    SystemParams((0.5,), Exponential(2.0), Exponential(1 / 0.3), alpha=0.1),
]
_MM1 = SystemParams((0.5,), Exponential(1.0), Exponential(1.0), alpha=0.0)


def _check_dists_lst_deriv() -> CheckResult:
    worst = 0.0
    for law in _SPECS:
        for s in (0.0, 0.1, 1.0, 10.0):
            for order in (1, 2):
                if s == 0.0:
                    # Central stencils would leave the domain; the moment
                    # identity is the derivative's limit there.
                    exact = -law.moment(1) if order == 1 else law.moment(2)
                else:
                    # Wider base step for second differences: h^-2 roundoff.
                    step = 1e-2 * max(1.0, s) if order == 2 else None
                    exact = central_derivative(law.lst, s, order, initial_step=step)
                got = law.lst_deriv(s, order)
                worst = max(worst, abs(got - exact) / max(abs(exact), 1e-12))
    return CheckResult("dists.lst_derivative_vs_fd", worst < 1e-8, f"max rel err {worst:.2e}")


def _check_dists_jensen() -> CheckResult:
    ok = all(d.moment(1) ** 2 <= d.moment(2) * (1 + 1e-12) for d in _SPECS)
    return CheckResult("dists.moment_jensen", ok, "m1^2 <= m2 for all families")


def _check_dists_h2_inversion() -> CheckResult:
    worst = 0.0
    # p = 1/2 exactly sits on the sqrt branch point and is ill-conditioned.
    for p in (0.55, 0.6, 0.7, 0.85, 0.99):
        d = make_h2_balanced(0.5, p)
        c2 = scv(d)
        recovered = 0.5 * (1.0 + math.sqrt(max((c2 - 1.0) / (c2 + 1.0), 0.0)))
        worst = max(worst, abs(recovered - p))
    return CheckResult("dists.h2_inversion", worst < 1e-12, f"max |p err| {worst:.2e}")


def _check_dists_lst_shape() -> CheckResult:
    for d in _SPECS:
        if abs(d.lst(0.0) - 1.0) > 1e-15:
            return CheckResult("dists.lst_shape", False, f"{d.literal()} lst(0) != 1")
        values = [d.lst(s) for s in (0.0, 0.5, 1.0, 2.0, 5.0)]
        if any(b >= a for a, b in zip(values, values[1:])):
            return CheckResult("dists.lst_shape", False, f"{d.literal()} not decreasing")
    return CheckResult("dists.lst_shape", True, "lst(0)=1 and strictly decreasing")


def _check_dists_sampling() -> CheckResult:
    rng = np.random.default_rng(1234)
    for d in (Exponential(2.0), Erlang(2, 4.0), HyperExp2(0.7, 2.8, 1.2)):
        draws = np.array([d.sample(rng) for _ in range(100_000)])
        pvalue = sps.kstest(draws, np.vectorize(d.cdf, otypes=[float])).pvalue
        if pvalue < 1e-3:
            return CheckResult("dists.sampling_ks", False, f"{d.literal()} KS p={pvalue:.2e}")
    det = Deterministic(0.5)
    if any(det.sample(rng) != 0.5 for _ in range(100)):
        return CheckResult("dists.sampling_ks", False, "deterministic draw drifted")
    return CheckResult("dists.sampling_ks", True, "KS at 0.001 for continuous families")


def _check_transforms_derivs() -> CheckResult:
    worst = 0.0
    for params in _PRESET_PARAMS:
        for a in (0.05, 0.1, 0.3, 1.0, 3.0):
            for order in (1, 2):
                fd = central_derivative(lambda x: transforms.sojourn_lst(params, x), a, order)
                got = transforms.sojourn_lst_deriv(params, a, order)
                worst = max(worst, abs(got - fd) / max(abs(fd), 1e-12))
    return CheckResult("transforms.sojourn_derivative_vs_fd", worst < 1e-6, f"max rel err {worst:.2e}")


def _check_transforms_pgf_norm() -> CheckResult:
    worst = max(
        max(abs(transforms.pgf_queue(p, 1.0) - 1.0), abs(transforms.pgf_system(p, 1.0) - 1.0))
        for p in _PRESET_PARAMS
    )
    return CheckResult("transforms.pgf_normalization", worst < 1e-9, f"max |pgf(1)-1| {worst:.2e}")


def _check_transforms_little() -> CheckResult:
    worst = 0.0
    for p in _PRESET_PARAMS:
        slope = backward_derivative_at_one(lambda z: transforms.pgf_system(p, z))
        target = transforms.mean_system_size(p)
        worst = max(worst, abs(slope - target) / target)
    return CheckResult("transforms.little_numeric", worst < 1e-6, f"max rel err {worst:.2e}")


def _check_transforms_zero_limit() -> CheckResult:
    worst = 0.0
    for p in _PRESET_PARAMS:
        got = -transforms.sojourn_lst_deriv(p, 1e-9, 1)
        worst = max(worst, abs(got - transforms.mean_sojourn(p)) / transforms.mean_sojourn(p))
    return CheckResult("transforms.sojourn_zero_limit", worst < 1e-8, f"max rel err {worst:.2e}")


def _check_transforms_classic_collapse() -> CheckResult:
    p = SystemParams((0.5,), Exponential(2.0), Exponential(1 / 0.3), alpha=0.0)
    ok = (
        abs(transforms.breakdown_kernel(p, 1.7) - 1.7) < 1e-15
        and abs(transforms.idle_prob(p) - 0.75) < 1e-12
        and abs(transforms.availability(p) - 1.0) < 1e-15
    )
    return CheckResult("transforms.classic_collapse", ok, "alpha=0 reduces to plain M/G/1")


def _check_aoi_identities() -> CheckResult:
    worst_split = worst_re = 0.0
    for p in _PRESET_PARAMS:
        for k in range(1, p.n_sources + 1):
            t = aoi.cross_terms(p, k)
            split = abs(t.residual_term - (t.prev_sojourn_term - t.gap_square_term))
            worst_split = max(worst_split, split / abs(t.residual_term))
            lam = p.rate_of(k)
            rebuilt = 1 / lam + lam * aoi.expected_xw(p, k) + transforms.completion_moments(p).eH
            d_pooled, _ = aoi.aaoi_source(p, k)
            worst_re = max(worst_re, abs(rebuilt - d_pooled) / d_pooled)
    ok = worst_split < 1e-10 and worst_re < 1e-10
    return CheckResult(
        "aoi.decomposition_identities", ok, f"split {worst_split:.2e}, rebuild {worst_re:.2e}"
    )


def _check_aoi_single_source() -> CheckResult:
    d_pooled, d_per_source = aoi.aaoi_source(_MM1, 1)
    probs = aoi.event_probs(_MM1, 1)
    ok = (
        abs(d_pooled - 3.5) < 1e-9
        and abs(d_per_source - 3.5) < 1e-9
        and abs(probs.p_l - transforms.sojourn_lst(_MM1, 0.5)) < 1e-14
    )
    return CheckResult("aoi.single_source_reduction", ok, f"M/M/1 delta {d_pooled:.12f}")


def _check_aoi_symmetric() -> CheckResult:
    p = SystemParams((0.3, 0.3), Erlang(2, 2 / _B1), Exponential(1 / 0.3), alpha=0.1)
    res = aoi.aaoi_all(p)
    e1, e2 = res.per_source
    same = abs(e1.delta_pooled - e2.delta_pooled) < 1e-12
    variants = abs(e1.delta_pooled - e1.delta_per_source) / e1.delta_pooled < 1e-12
    return CheckResult("aoi.symmetric_sources", same and variants, "equal deltas, variants coincide")


def _check_aoi_bounds_monotone() -> CheckResult:
    p0 = _PRESET_PARAMS[0]
    cm = transforms.completion_moments(p0)
    for e in aoi.aaoi_all(p0).per_source:
        if e.delta_pooled < 1 / p0.rate_of(e.source) + cm.eH - 1e-12:
            return CheckResult("aoi.bounds_monotone", False, "lower bound violated")
    last = -math.inf
    for a in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
        d, _ = aoi.aaoi_source(p0.with_alpha(a), 1)
        if d < last - 1e-12:
            return CheckResult("aoi.bounds_monotone", False, f"not monotone in alpha at {a}")
        last = d
    last = -math.inf
    for m in (0.1, 0.3, 0.5, 0.7, 0.9):
        p = SystemParams(p0.arrival_rates, p0.service, with_mean(p0.repair_for(1), m), p0.alpha)
        d, _ = aoi.aaoi_source(p, 1)
        if d < last - 1e-12:
            return CheckResult("aoi.bounds_monotone", False, f"not monotone in repair mean at {m}")
        last = d
    return CheckResult("aoi.bounds_monotone", True, "lower bound, alpha and repair-mean monotone")


def _check_des_determinism() -> CheckResult:
    cfg = SimConfig(params=_PRESET_PARAMS[0], horizon_deliveries=2000, replications=2, master_seed=42)
    a = run_replication(cfg, 0)
    b = run_replication(cfg, 0)
    ok = a.aaoi[0] == b.aaoi[0] and a.stat_time == b.stat_time and a.e_xw[0] == b.e_xw[0]
    return CheckResult("des.determinism", ok, "identical replication twice")


def _check_des_structure() -> CheckResult:
    cfg = SimConfig(params=_PRESET_PARAMS[0], horizon_deliveries=5000, replications=4, master_seed=7)
    rep = run_experiment(cfg)
    ok = rep.identity_error_max < 1e-9
    ok = ok and rep.idle_fraction.mean <= rep.availability_fraction.mean
    cfg0 = SimConfig(params=_MM1, horizon_deliveries=5000, replications=2, master_seed=7)
    rep0 = run_experiment(cfg0)
    ok = ok and rep0.availability_fraction.mean == 1.0
    return CheckResult(
        "des.structural_invariants",
        ok,
        f"sojourn identity err {rep.identity_error_max:.1e}, idle <= availability",
    )


def _check_des_mm1() -> CheckResult:
    cfg = SimConfig(params=_MM1, horizon_deliveries=5000, replications=24, master_seed=11)
    rep = run_experiment(cfg)
    z = rep.source(1).aaoi.z_score(3.5)
    return CheckResult("des.mm1_aaoi", abs(z) < 4.0, f"z vs 3.5 = {z:.2f}")


def _check_des_two_estimators() -> CheckResult:
    cfg = SimConfig(params=_PRESET_PARAMS[0], horizon_deliveries=8000, replications=12, master_seed=13)
    rep = run_experiment(cfg)
    s = rep.source(1)
    diff = abs(s.aaoi.mean - s.aaoi_cycle.mean)
    scale = math.hypot(s.aaoi.se or 0.0, s.aaoi_cycle.se or 0.0)
    ok = diff <= 4.0 * max(scale, 1e-12)
    return CheckResult("des.aaoi_two_estimators", ok, f"|area - cycle| = {diff:.2e}")


def _check_des_steady_state() -> CheckResult:
    p = _PRESET_PARAMS[2]
    cfg = SimConfig(params=p, horizon_deliveries=20_000, replications=10, master_seed=17)
    rep = run_experiment(cfg)
    zs = [
        rep.idle_fraction.z_score(transforms.idle_prob(p)),
        rep.availability_fraction.z_score(transforms.availability(p)),
        rep.mean_system_size.z_score(transforms.mean_system_size(p)),
    ]
    zs += [est.z_score(transforms.pgf_system(p, z)) for z, est in rep.pgf]
    worst = max(abs(z) for z in zs)
    return CheckResult("des.steady_state_match", worst < 4.0, f"max |z| {worst:.2f}")


_CHECKS = [
    _check_dists_lst_deriv,
    _check_dists_jensen,
    _check_dists_h2_inversion,
    _check_dists_lst_shape,
    _check_dists_sampling,
    _check_transforms_derivs,
    _check_transforms_pgf_norm,
    _check_transforms_little,
    _check_transforms_zero_limit,
    _check_transforms_classic_collapse,
    _check_aoi_identities,
    _check_aoi_single_source,
    _check_aoi_symmetric,
    _check_aoi_bounds_monotone,
    _check_des_determinism,
    _check_des_structure,
    _check_des_mm1,
    _check_des_two_estimators,
    _check_des_steady_state,
]


def run_selfcheck() -> list[CheckResult]:
    """Run every invariant check; never raises, failures are results."""
    results = []
    for check in _CHECKS:
        try:
            results.append(check())
        except Exception as exc:  # a crashed check is a failed check
            results.append(CheckResult(check.__name__.strip("_"), False, f"raised {exc!r}"))
    return results
