"""Shared fixtures and independent oracle helpers."""

from __future__ import annotations

import math

import pytest

from aoiq import Deterministic, Erlang, Exponential, HyperExp2, SystemParams, make_h2_balanced
from aoiq.des import SimConfig, run_experiment

# Raw service mean solving completion mean 0.5 at alpha=0.1, E[repair]=0.3.
B1 = 0.5 / 1.03

REPAIR = Exponential(rate=1.0 / 0.3)


def fig3_params(family: str, n: int, lam1: float) -> SystemParams:
    service = {
        "erlang2": Erlang(2, 2.0 / B1),
        "h2": make_h2_balanced(B1, 0.7),
        "exp": Exponential(1.0 / B1),
    }[family]
    return SystemParams((lam1,) + (0.12,) * (n - 1), service, REPAIR, alpha=0.1)


def fig3_grid() -> list[tuple[str, int, float]]:
    return [
        (fam, n, lam1)
        for fam in ("erlang2", "h2")
        for n in (2, 3, 4)
        for lam1 in (0.3, 0.5, 0.7, 0.9)
    ]


@pytest.fixture(scope="session")
def mm1_params() -> SystemParams:
    return SystemParams((0.5,), Exponential(1.0), Exponential(1.0), alpha=0.0)


@pytest.fixture(scope="session")
def breakdown_params() -> SystemParams:
    # Running single-source example: p0=0.7425, availability=0.9925.
    return SystemParams((0.5,), Exponential(2.0), REPAIR, alpha=0.1)


@pytest.fixture(scope="session")
def mm1_run(mm1_params):
    cfg = SimConfig(params=mm1_params, horizon_deliveries=10_000, replications=20, master_seed=7)
    return cfg, run_experiment(cfg)


@pytest.fixture(scope="session")
def breakdown_run(breakdown_params):
    cfg = SimConfig(
        params=breakdown_params, horizon_deliveries=20_000, replications=12, master_seed=11
    )
    return cfg, run_experiment(cfg)


# --- independent reference transforms for finite-difference oracles ---------
#
# These re-derive each LST from its definition and extend it to the small
# negative arguments central stencils need near s=0 (the integrals converge
# for s > -min(rate)). They never touch the package's derivative code.


def ref_lst(d, s: float) -> float:
    if isinstance(d, Exponential):
        return d.rate / (d.rate + s)
    if isinstance(d, Erlang):
        return (d.rate / (d.rate + s)) ** d.shape
    if isinstance(d, HyperExp2):
        return d.p * d.rate1 / (d.rate1 + s) + (1 - d.p) * d.rate2 / (d.rate2 + s)
    if isinstance(d, Deterministic):
        return math.exp(-s * d.value)
    raise TypeError(f"no reference LST for {d!r}")


def rel_err(got: float, expected: float, floor: float = 1e-300) -> float:
    return abs(got - expected) / max(abs(expected), floor)
