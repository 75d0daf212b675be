"""Pure-Python reference simulator used as a cross-implementation oracle.

Same queueing semantics as the compiled core - FCFS across sources,
failures only while serving, preemptive-resume repair, fresh failure clock
after each repair - but written independently: chronological scan over a
plain event list, a Python list as the queue, and the package's public
`sample` methods on a numpy Generator for all draws. Statistics carry
per-replication means so the agreement test can use real standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from aoiq import SystemParams
from aoiq.des import AoiTracker


@dataclass
class RefStats:
    aaoi: float  # source 1, area / elapsed
    mean_waiting: float
    mean_sojourn: float
    p_l: float
    e_xw: float
    e_xw_prior_in_system: float
    e_xw_prior_departed: float
    idle_fraction: float
    availability_fraction: float


def simulate(params: SystemParams, n_deliveries: int, seed: int,
             warmup_fraction: float = 0.1) -> RefStats:
    """One replication, horizon counted in source-1 deliveries."""
    rng = np.random.default_rng(seed)
    n = params.n_sources
    rates = params.arrival_rates
    alpha = params.alpha

    next_arrival = [rng.exponential(1.0 / r) for r in rates]
    queue: list[tuple[int, float, float, int]] = []  # (src, t_arr, gap, cls)
    mode = 0  # 0 idle, 1 serving, 2 repairing
    current: tuple[int, float, float, int, float] | None = None  # + waiting
    remaining = 0.0
    t_done = t_fail = t_repaired = math.inf
    now = 0.0

    last_arrival = [None] * n
    n_arrived = [0] * n
    n_delivered = [0] * n
    tracker = AoiTracker()

    warmup_target = int(warmup_fraction * n_deliveries)
    collecting = warmup_target == 0
    stat_start = 0.0
    area_at_cut = 0.0
    idle_time = avail_time = 0.0
    waits: list[float] = []
    sojourns: list[float] = []
    xw: list[float] = []
    xw_b: list[float] = []
    xw_l: list[float] = []
    class_counts = [0, 0]  # [prior in system, prior departed]

    def begin_service(src, t_arr, gap, cls, t):
        nonlocal mode, current, remaining, t_done, t_fail
        waiting = t - t_arr
        current = (src, t_arr, gap, cls, waiting)
        remaining = params.service_for(src + 1).sample(rng)
        t_done = t + remaining
        t_fail = t + rng.exponential(1.0 / alpha) if alpha > 0 else math.inf
        mode = 1
        if collecting and t_arr >= stat_start and src == 0:
            waits.append(waiting)
            if cls:
                xw.append(gap * waiting)
                (xw_b if cls == 1 else xw_l).append(gap * waiting)

    while True:
        events = [(next_arrival[k], 2, k) for k in range(n)]
        if mode == 1:
            events.append((t_done, 0, -1))
            events.append((t_fail, 3, -1))
        elif mode == 2:
            events.append((t_repaired, 1, -1))
        t, kind, src = min(events)

        if collecting:
            dt = t - now
            if mode == 0:
                idle_time += dt
            if mode != 2:
                avail_time += dt
        now = t

        if kind == 0:  # service completion
            s, t_arr, gap, cls, waiting = current
            if s == 0:
                tracker.record_delivery(now, t_arr)
                if collecting and t_arr >= stat_start:
                    sojourns.append(now - t_arr)
            n_delivered[s] += 1
            if queue:
                begin_service(*queue.pop(0), now)
            else:
                mode = 0
                current = None
                t_done = t_fail = math.inf
            if s == 0:
                if not collecting and n_delivered[0] == warmup_target:
                    collecting = True
                    stat_start = now
                    # The trapezoid integral splits exactly at any instant,
                    # so the warmup share can simply be subtracted later.
                    area_at_cut = tracker.close(now)
                if n_delivered[0] == n_deliveries:
                    break
        elif kind == 1:  # repair completion
            mode = 1
            t_done = now + remaining
            t_fail = now + rng.exponential(1.0 / alpha) if alpha > 0 else math.inf
            t_repaired = math.inf
        elif kind == 2:  # arrival
            k = src
            if n_arrived[k] >= 1:
                gap = now - last_arrival[k]
                cls = 1 if n_delivered[k] < n_arrived[k] else 2
            else:
                gap, cls = 0.0, 0
            n_arrived[k] += 1
            last_arrival[k] = now
            next_arrival[k] = now + rng.exponential(1.0 / rates[k])
            if collecting and k == 0 and cls:
                class_counts[cls - 1] += 1
            if mode == 0:
                begin_service(k, now, gap, cls, now)
            else:
                queue.append((k, now, gap, cls))
        else:  # failure while serving
            remaining = t_done - now
            t_repaired = now + params.repair_for(current[0] + 1).sample(rng)
            t_done = t_fail = math.inf
            mode = 2

    elapsed = now - stat_start
    classified = sum(class_counts)
    return RefStats(
        aaoi=(tracker.close(now) - area_at_cut) / elapsed,
        mean_waiting=float(np.mean(waits)),
        mean_sojourn=float(np.mean(sojourns)),
        p_l=class_counts[1] / classified,
        e_xw=float(np.mean(xw)),
        e_xw_prior_in_system=float(np.mean(xw_b)) if xw_b else math.nan,
        e_xw_prior_departed=float(np.mean(xw_l)) if xw_l else math.nan,
        idle_fraction=idle_time / elapsed,
        availability_fraction=avail_time / elapsed,
    )
