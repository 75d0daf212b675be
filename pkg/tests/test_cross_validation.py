"""Two independent simulators must agree with each other.

The compiled core and the pure-Python reference implement the same
queueing semantics with entirely different code (event handling, queue
structures, random streams, age accounting). Their replication means are
compared as a two-sample z-test; agreement here is what licenses using
the compiled simulator as the oracle for the closed-form checks,
including at the points where the closed form itself deviates.
"""

import math

import numpy as np
import pytest

from aoiq.des import SimConfig, run_experiment

from conftest import fig3_params
import reference_sim

REPS = 10
HORIZON = 6000


def _ref_estimates(params, attr):
    values = [
        getattr(reference_sim.simulate(params, HORIZON, seed=1000 + r), attr)
        for r in range(REPS)
    ]
    values = [v for v in values if v == v]
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(len(values)))
    return mean, se


@pytest.fixture(scope="module", params=["single-breakdown", "two-source-erlang"])
def point(request):
    if request.param == "single-breakdown":
        from aoiq import Exponential, SystemParams

        from conftest import REPAIR

        return SystemParams((0.5,), Exponential(2.0), REPAIR, alpha=0.1)
    return fig3_params("erlang2", 2, 0.3)


@pytest.fixture(scope="module")
def core_report(point):
    cfg = SimConfig(params=point, horizon_deliveries=HORIZON, replications=REPS, master_seed=55)
    return run_experiment(cfg, keep_replications=False)


@pytest.mark.parametrize(
    "attr,core_getter",
    [
        ("aaoi", lambda rep: rep.source(1).aaoi),
        ("mean_waiting", lambda rep: rep.source(1).mean_waiting),
        ("mean_sojourn", lambda rep: rep.source(1).mean_sojourn),
        ("p_l", lambda rep: rep.source(1).p_l),
        ("e_xw", lambda rep: rep.source(1).e_xw),
        ("idle_fraction", lambda rep: rep.idle_fraction),
        ("availability_fraction", lambda rep: rep.availability_fraction),
    ],
)
def test_core_matches_reference(point, core_report, attr, core_getter):
    ref_mean, ref_se = _ref_estimates(point, attr)
    est = core_getter(core_report)
    scale = math.hypot(ref_se, est.se)
    z = (est.mean - ref_mean) / scale
    assert abs(z) < 4.0, (
        f"{attr}: core {est.mean:.6f} +/- {est.se:.2e} vs "
        f"reference {ref_mean:.6f} +/- {ref_se:.2e} (z={z:.2f})"
    )
