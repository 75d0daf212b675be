"""Figure presets: canned parameter families for the standard experiments.

Each preset fixes the shared defaults (other-source rate 0.12,
failure rate 0.1, exponential repair with mean 0.3, completion-time mean
0.5) and a one-dimensional sweep. The completion mean is interpreted as
the repair-inflated service mean: the raw service mean solves
b1 = mean / (1 + alpha * E[repair]) at the preset's base alpha and repair
law, and stays frozen while the sweep variable moves (`raw_service_mean`
switches to b1 = mean). Service families:

- ``erlang2``: two-phase Erlang,
- ``h2``: balanced-means hyperexponential with mixing probability 0.7,
- ``exp``: plain exponential (the p = 1 degenerate hyperexponential).
"""

from __future__ import annotations

from .dists import Erlang, Exponential, make_h2_balanced

SWEEP_VARS = ("lambda1", "rho1", "alpha", "repair_mean", "availability")

FAMILY_NAMES = ("erlang2", "h2", "exp")


def build_family(name: str, mean: float, h2_p: float = 0.7):
    """A service law of the named family with the given raw mean."""
    if name == "erlang2":
        return Erlang(shape=2, rate=2.0 / mean)
    if name == "h2":
        return make_h2_balanced(mean, h2_p)
    if name == "exp":
        return Exponential(rate=1.0 / mean)
    raise ValueError(f"unknown service family {name!r}")


def _grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    n = round((stop - start) / step)
    return tuple(round(start + i * step, 12) for i in range(n + 1))


_COMMON = dict(
    lambda_other=0.12,
    alpha=0.1,
    repair=Exponential(rate=1.0 / 0.3),
    service_mean=0.5,
    h2_p=0.7,
)

PRESETS: dict[str, dict] = {
    "fig3": dict(
        _COMMON,
        sweep_var="lambda1",
        sweep_grid=(0.3, 0.5, 0.7, 0.9),
        n_sources_list=(2, 3, 4),
        service_families=("erlang2", "h2"),
    ),
    "fig4": dict(
        _COMMON,
        sweep_var="rho1",
        sweep_grid=(0.15, 0.25, 0.35, 0.45),
        n_sources_list=(2, 3, 4),
        service_families=("erlang2", "h2"),
    ),
    "fig5": dict(
        _COMMON,
        sweep_var="alpha",
        sweep_grid=_grid(0.0, 0.5, 0.05),
        n_sources_list=(2, 3, 4),
        service_families=("erlang2", "h2", "exp"),
        lambda1=0.3,
    ),
    "fig6a": dict(
        _COMMON,
        sweep_var="repair_mean",
        sweep_grid=_grid(0.1, 0.9, 0.1),
        n_sources_list=(2, 4),
        service_families=("erlang2", "h2"),
        lambda1=0.3,
    ),
    "fig6b": dict(
        _COMMON,
        # The grid holds arrival rates of the tagged source; the emitted
        # x-value is the availability computed at each point.
        sweep_var="availability",
        sweep_grid=_grid(0.06, 0.6, 0.06),
        n_sources_list=(2, 4),
        service_families=("erlang2", "h2"),
    ),
}
