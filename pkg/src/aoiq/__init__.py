"""Age-of-information analysis for multi-source M/G/1 queues with server
breakdowns and preemptive-resume repair.

Closed-form per-source average AoI, the underlying transform algebra, and
a discrete-event simulator that validates every analytic quantity.
"""

from .aoi import (
    AaoiResult,
    CrossTerms,
    EventProbs,
    aaoi_all,
    aaoi_source,
    baseline_aaoi,
    cross_terms,
    event_probs,
    expected_xw,
)
from .dists import (
    Deterministic,
    DistributionError,
    DistributionSpec,
    Erlang,
    Exponential,
    HyperExp2,
    make_h2_balanced,
    parse_distribution,
    scv,
    with_mean,
)
from .system import ParameterError, StabilityError, SystemParams
from .transforms import (
    CompletionMoments,
    availability,
    breakdown_kernel,
    completion_lst,
    completion_moments,
    idle_prob,
    mean_sojourn,
    mean_system_size,
    mean_waiting,
    pgf_queue,
    pgf_system,
    sojourn_lst,
    sojourn_lst_deriv,
)

__version__ = "0.1.0"

__all__ = [
    "AaoiResult",
    "CompletionMoments",
    "CrossTerms",
    "Deterministic",
    "DistributionError",
    "DistributionSpec",
    "Erlang",
    "EventProbs",
    "Exponential",
    "HyperExp2",
    "ParameterError",
    "StabilityError",
    "SystemParams",
    "aaoi_all",
    "aaoi_source",
    "availability",
    "baseline_aaoi",
    "breakdown_kernel",
    "completion_lst",
    "completion_moments",
    "cross_terms",
    "event_probs",
    "expected_xw",
    "idle_prob",
    "make_h2_balanced",
    "mean_sojourn",
    "mean_system_size",
    "mean_waiting",
    "parse_distribution",
    "pgf_queue",
    "pgf_system",
    "scv",
    "sojourn_lst",
    "sojourn_lst_deriv",
    "with_mean",
]
