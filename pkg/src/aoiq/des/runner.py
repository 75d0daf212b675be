"""Replication harness around the simulation core.

Runs independent replications with named random streams derived from the
master seed, aggregates their means, and attaches Student-t confidence
intervals. Identical configuration and seed reproduce identical results
bit for bit; replication index order fixes the aggregation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from ..dists import Deterministic, DistributionSpec, Erlang, Exponential, HyperExp2
from ..system import SystemParams
from . import core
from .rng import make_states


class ConfigError(ValueError):
    """Invalid simulation configuration."""


EVENT_NAMES = {
    core.EV_ARRIVAL: "arrival",
    core.EV_DEPARTURE: "departure",
    core.EV_FAILURE: "failure",
    core.EV_REPAIR: "repair",
}
MODE_NAMES = {
    core.MODE_IDLE: "idle",
    core.MODE_SERVING: "serving",
    core.MODE_REPAIRING: "repairing",
}

TRACE_HEADER = "time,event_type,source,queue_len,server_mode"


@dataclass(frozen=True)
class SimConfig:
    """Replication plan for one parameter set.

    Exactly one horizon applies: `horizon_deliveries` counts deliveries of
    the first (tagged) source, `horizon_time` stops at a simulated instant.
    The first `warmup_fraction` of the horizon is discarded before any
    statistic accumulates.
    """

    params: SystemParams
    horizon_deliveries: int | None = 100_000
    horizon_time: float | None = None
    warmup_fraction: float = 0.1
    replications: int = 10
    master_seed: int = 1
    pgf_points: tuple[float, ...] = (0.3, 0.6, 0.9)

    def __post_init__(self):
        if (self.horizon_deliveries is None) == (self.horizon_time is None):
            raise ConfigError("exactly one of horizon_deliveries / horizon_time must be set")
        if self.horizon_deliveries is not None and self.horizon_deliveries <= 0:
            raise ConfigError(f"horizon must be positive, got {self.horizon_deliveries}")
        if self.horizon_time is not None and self.horizon_time <= 0.0:
            raise ConfigError(f"time horizon must be positive, got {self.horizon_time}")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigError(f"warmup fraction must be in [0, 1), got {self.warmup_fraction}")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        for z in self.pgf_points:
            if not 0.0 <= z <= 1.0:
                raise ConfigError(f"pgf points must be in [0, 1], got {z}")


def _encode_law(d: DistributionSpec) -> tuple[int, float, float, float]:
    if isinstance(d, Exponential):
        return core.FAM_EXP, d.rate, 0.0, 0.0
    if isinstance(d, Erlang):
        return core.FAM_ERLANG, float(d.shape), d.rate, 0.0
    if isinstance(d, HyperExp2):
        return core.FAM_H2, d.p, d.rate1, d.rate2
    if isinstance(d, Deterministic):
        return core.FAM_DET, d.value, 0.0, 0.0
    raise ConfigError(f"unsupported law for simulation: {d!r}")


def _encode_params(params: SystemParams):
    n = params.n_sources
    rates = np.array(params.arrival_rates, dtype=np.float64)
    svc_code = np.empty(n, dtype=np.int64)
    svc_par = np.zeros((n, 3), dtype=np.float64)
    rep_code = np.empty(n, dtype=np.int64)
    rep_par = np.zeros((n, 3), dtype=np.float64)
    for k in range(n):
        svc_code[k], *row = _encode_law(params.service_for(k + 1))
        svc_par[k] = row
        rep_code[k], *rrow = _encode_law(params.repair_for(k + 1))
        rep_par[k] = rrow
    return rates, svc_code, svc_par, rep_code, rep_par


@dataclass(frozen=True)
class TraceRecord:
    """Per-event trace of one replication, in event order."""

    times: np.ndarray
    event_types: np.ndarray
    sources: np.ndarray
    queue_lens: np.ndarray
    server_modes: np.ndarray
    truncated: bool

    def __len__(self) -> int:
        return len(self.times)

    def rows(self):
        """Yield CSV-ready rows (1-based source ids, symbolic names)."""
        for i in range(len(self.times)):
            yield (
                self.times[i],
                EVENT_NAMES[int(self.event_types[i])],
                int(self.sources[i]) + 1,
                int(self.queue_lens[i]),
                MODE_NAMES[int(self.server_modes[i])],
            )


def write_trace_csv(path, trace: TraceRecord) -> None:
    with open(path, "w") as fh:
        fh.write(TRACE_HEADER + "\n")
        for t, ev, src, qlen, mode in trace.rows():
            fh.write(f"{t:.9f},{ev},{src},{qlen},{mode}\n")


@dataclass(frozen=True)
class ReplicationStats:
    """Raw statistics of a single replication."""

    replication: int
    stat_time: float
    end_time: float
    aaoi: np.ndarray  # per-source area / stat time
    aaoi_cycle: np.ndarray  # per-source empirical rate * mean cycle area
    mean_sojourn: np.ndarray
    mean_waiting: np.ndarray
    p_l: np.ndarray
    e_xw: np.ndarray
    deliveries: np.ndarray  # post-warmup, per source
    arrivals: np.ndarray  # post-warmup, per source
    deliveries_total: np.ndarray  # including warmup
    idle_fraction: float
    availability_fraction: float
    mean_system_size: float
    pgf_values: np.ndarray
    identity_error: float
    max_queue_len: int


def run_replication(
    config: SimConfig, replication: int, trace: bool = False, trace_limit: int = 2_000_000
) -> ReplicationStats | tuple[ReplicationStats, TraceRecord]:
    """Run one replication; deterministic in (master_seed, replication)."""
    if replication < 0 or replication >= config.replications:
        raise ConfigError(f"replication index {replication} outside 0..{config.replications - 1}")
    params = config.params
    rates, svc_code, svc_par, rep_code, rep_par = _encode_params(params)
    states = make_states(config.master_seed, replication, params.n_sources)
    if config.horizon_deliveries is not None:
        hmode, hval = core.HORIZON_DELIVERIES, float(config.horizon_deliveries)
    else:
        hmode, hval = core.HORIZON_TIME, float(config.horizon_time)
    out = core.run_core(
        rates,
        svc_code,
        svc_par,
        rep_code,
        rep_par,
        float(params.alpha),
        hmode,
        hval,
        float(config.warmup_fraction),
        states,
        np.array(config.pgf_points, dtype=np.float64),
        trace,
        trace_limit,
    )
    scalars, ps, pgf_area, tr_t, tr_ty, tr_s, tr_q, tr_m, truncated = out

    stat_time = scalars[core.SC_STAT_TIME]
    with np.errstate(invalid="ignore", divide="ignore"):
        aaoi = ps[:, core.PS_AREA] / stat_time
        lam_hat = ps[:, core.PS_ARRIV_POST] / stat_time
        mean_b = ps[:, core.PS_SUM_B] / ps[:, core.PS_CNT_B]
        aaoi_cycle = lam_hat * mean_b
        mean_sojourn = ps[:, core.PS_SUM_T] / ps[:, core.PS_CNT_T]
        mean_waiting = ps[:, core.PS_SUM_W] / ps[:, core.PS_CNT_W]
        classified = ps[:, core.PS_CNT_AB] + ps[:, core.PS_CNT_AL]
        p_l = ps[:, core.PS_CNT_AL] / classified
        e_xw = ps[:, core.PS_SUM_XW] / ps[:, core.PS_CNT_XW]
        idle_fraction = scalars[core.SC_IDLE_TIME] / stat_time
        availability_fraction = scalars[core.SC_AVAIL_TIME] / stat_time
        mean_system_size = scalars[core.SC_SIZE_AREA] / stat_time
        pgf_values = pgf_area / stat_time

    stats = ReplicationStats(
        replication=replication,
        stat_time=stat_time,
        end_time=scalars[core.SC_END_TIME],
        aaoi=aaoi,
        aaoi_cycle=aaoi_cycle,
        mean_sojourn=mean_sojourn,
        mean_waiting=mean_waiting,
        p_l=p_l,
        e_xw=e_xw,
        deliveries=ps[:, core.PS_DELIV_POST].astype(np.int64),
        arrivals=ps[:, core.PS_ARRIV_POST].astype(np.int64),
        deliveries_total=ps[:, core.PS_DELIV_TOTAL].astype(np.int64),
        idle_fraction=idle_fraction,
        availability_fraction=availability_fraction,
        mean_system_size=mean_system_size,
        pgf_values=pgf_values,
        identity_error=scalars[core.SC_IDENTITY_ERR],
        max_queue_len=int(scalars[core.SC_MAX_QLEN]),
    )
    if not trace:
        return stats
    return stats, TraceRecord(tr_t, tr_ty, tr_s, tr_q, tr_m, truncated)


@dataclass(frozen=True)
class Estimate:
    """Replication mean with its standard error and 95% half-width."""

    mean: float
    se: float | None = None
    ci95: float | None = None
    n: int = 1

    def covers(self, value: float) -> bool:
        if self.ci95 is None:
            raise ValueError("no interval available from a single replication")
        return abs(value - self.mean) <= self.ci95

    def z_score(self, value: float) -> float:
        if not self.se:
            return math.inf if value != self.mean else 0.0
        return (value - self.mean) / self.se


def _estimate(values: np.ndarray) -> Estimate:
    vals = np.asarray(values, dtype=np.float64)
    vals = vals[~np.isnan(vals)]
    n = len(vals)
    if n == 0:
        return Estimate(mean=math.nan, se=None, ci95=None, n=0)
    mean = float(vals.mean())
    if n == 1:
        return Estimate(mean=mean, se=None, ci95=None, n=1)
    se = float(vals.std(ddof=1) / math.sqrt(n))
    tcrit = float(sps.t.ppf(0.975, n - 1))
    return Estimate(mean=mean, se=se, ci95=tcrit * se, n=n)


@dataclass(frozen=True)
class SourceSimStats:
    source: int
    aaoi: Estimate
    aaoi_cycle: Estimate
    mean_sojourn: Estimate
    mean_waiting: Estimate
    p_l: Estimate
    e_xw: Estimate
    deliveries: int
    arrivals: int


@dataclass(frozen=True)
class SimulationReport:
    """Replication-aggregated estimates for one parameter set."""

    per_source: tuple[SourceSimStats, ...]
    idle_fraction: Estimate
    availability_fraction: Estimate
    mean_system_size: Estimate
    pgf: tuple[tuple[float, Estimate], ...]
    total_deliveries: int
    identity_error_max: float
    replications: int
    master_seed: int
    stat_time_mean: float
    max_queue_len: int
    replication_stats: tuple[ReplicationStats, ...] = field(repr=False, default=())

    def source(self, source: int) -> SourceSimStats:
        return self.per_source[source - 1]


def run_experiment(config: SimConfig, keep_replications: bool = True) -> SimulationReport:
    """Run all replications in index order and aggregate."""
    reps = [run_replication(config, r) for r in range(config.replications)]
    n_src = config.params.n_sources

    per_source = []
    for k in range(n_src):
        per_source.append(
            SourceSimStats(
                source=k + 1,
                aaoi=_estimate([r.aaoi[k] for r in reps]),
                aaoi_cycle=_estimate([r.aaoi_cycle[k] for r in reps]),
                mean_sojourn=_estimate([r.mean_sojourn[k] for r in reps]),
                mean_waiting=_estimate([r.mean_waiting[k] for r in reps]),
                p_l=_estimate([r.p_l[k] for r in reps]),
                e_xw=_estimate([r.e_xw[k] for r in reps]),
                deliveries=int(sum(r.deliveries[k] for r in reps)),
                arrivals=int(sum(r.arrivals[k] for r in reps)),
            )
        )
    pgf = tuple(
        (z, _estimate([r.pgf_values[i] for r in reps]))
        for i, z in enumerate(config.pgf_points)
    )
    return SimulationReport(
        per_source=tuple(per_source),
        idle_fraction=_estimate([r.idle_fraction for r in reps]),
        availability_fraction=_estimate([r.availability_fraction for r in reps]),
        mean_system_size=_estimate([r.mean_system_size for r in reps]),
        pgf=pgf,
        total_deliveries=int(sum(int(r.deliveries.sum()) for r in reps)),
        identity_error_max=max(r.identity_error for r in reps),
        replications=config.replications,
        master_seed=config.master_seed,
        stat_time_mean=float(np.mean([r.stat_time for r in reps])),
        max_queue_len=max(r.max_queue_len for r in reps),
        replication_stats=tuple(reps) if keep_replications else (),
    )
