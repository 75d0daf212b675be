"""Event loop of the unreliable multi-source M/G/1 simulator.

One replication is a single sequential pass over an event set of at most
N+3 pending events: the next arrival of each source, the service
completion and failure clocks while serving, and the repair completion
while repairing. Failures run only while serving; on failure the remaining
service is frozen, one repair is drawn and completes, then service resumes
with a fresh failure clock (distributionally equivalent to resuming the
exponential clock). Simultaneous events are dispatched in the fixed order
service completion, repair completion, arrivals by ascending source index,
failure; ties have probability zero under the continuous laws, the order
just pins reproducibility.

Age accounting inlines the closed-form trapezoid of
:mod:`aoiq.des.tracker`. All statistics are accumulated after the warmup
cut; the cut happens at the warmup-th tagged-source delivery (delivery
horizon) or at the warmup fraction of the end time (time horizon).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import xo_exponential, xo_uniform

# Distribution family codes for the compiled samplers.
FAM_EXP = 0
FAM_ERLANG = 1
FAM_H2 = 2
FAM_DET = 3

# Horizon modes.
HORIZON_DELIVERIES = 0
HORIZON_TIME = 1

# Event codes, also used as trace row types.
EV_ARRIVAL = 0
EV_DEPARTURE = 1
EV_FAILURE = 2
EV_REPAIR = 3

# Server modes.
MODE_IDLE = 0
MODE_SERVING = 1
MODE_REPAIRING = 2

# Columns of the per-source result matrix.
PS_AREA = 0
PS_DELIV_POST = 1
PS_ARRIV_POST = 2
PS_SUM_T = 3
PS_CNT_T = 4
PS_SUM_W = 5
PS_CNT_W = 6
PS_SUM_XW = 7
PS_CNT_XW = 8
PS_CNT_AB = 9
PS_CNT_AL = 10
PS_SUM_B = 11
PS_CNT_B = 12
PS_DELIV_TOTAL = 13
PS_COLS = 14

# Entries of the scalar result vector.
SC_END_TIME = 0
SC_STAT_START = 1
SC_STAT_TIME = 2
SC_IDLE_TIME = 3
SC_AVAIL_TIME = 4
SC_SIZE_AREA = 5
SC_IDENTITY_ERR = 6
SC_DELIV_POST = 7
SC_ARRIV_POST = 8
SC_MAX_QLEN = 9
SC_COLS = 10


@njit(cache=True)
def _draw(code, p0, p1, p2, states, stream):
    """One draw from an encoded positive law."""
    if code == FAM_EXP:
        return xo_exponential(states, stream, 1.0 / p0)
    if code == FAM_ERLANG:
        total = 0.0
        scale = 1.0 / p1
        for _ in range(int(p0)):
            total += xo_exponential(states, stream, scale)
        return total
    if code == FAM_H2:
        if xo_uniform(states, stream) < p0:
            return xo_exponential(states, stream, 1.0 / p1)
        return xo_exponential(states, stream, 1.0 / p2)
    return p0  # deterministic


@njit(cache=True)
def _area_piece(anchor, timestamp, t):
    age_end = t - timestamp
    age_start = anchor - timestamp
    return 0.5 * (age_end * age_end - age_start * age_start)


@njit(cache=True)
def _grow_f8(arr, head, count):
    out = np.empty(arr.shape[0] * 2, dtype=np.float64)
    cap = arr.shape[0]
    for i in range(count):
        out[i] = arr[(head + i) % cap]
    return out


@njit(cache=True)
def _grow_i8(arr, head, count):
    out = np.empty(arr.shape[0] * 2, dtype=np.int64)
    cap = arr.shape[0]
    for i in range(count):
        out[i] = arr[(head + i) % cap]
    return out


@njit(cache=True)
def _trace_push(buffers, n_tr, limit, t, ev, src, qlen, mode):
    """Append one trace row, growing the buffers; returns (buffers, n, alive)."""
    tr_time, tr_type, tr_src, tr_qlen, tr_mode = buffers
    if n_tr >= limit:
        return buffers, n_tr, False
    if n_tr == tr_time.shape[0]:
        tr_time = _grow_f8(tr_time, 0, n_tr)
        tr_type = _grow_i8(tr_type, 0, n_tr)
        tr_src = _grow_i8(tr_src, 0, n_tr)
        tr_qlen = _grow_i8(tr_qlen, 0, n_tr)
        tr_mode = _grow_i8(tr_mode, 0, n_tr)
    tr_time[n_tr] = t
    tr_type[n_tr] = ev
    tr_src[n_tr] = src
    tr_qlen[n_tr] = qlen
    tr_mode[n_tr] = mode
    return (tr_time, tr_type, tr_src, tr_qlen, tr_mode), n_tr + 1, True


@njit(cache=True)
def run_core(
    rates,  # f8[n] arrival rate per source
    svc_code,  # i8[n] service family per source
    svc_par,  # f8[n,3]
    rep_code,  # i8[n] repair family per source
    rep_par,  # f8[n,3]
    alpha,  # failure rate while serving
    horizon_mode,  # HORIZON_DELIVERIES or HORIZON_TIME
    horizon_value,  # tagged-source delivery count or end time
    warmup_frac,
    states,  # u8[n+3,4] rng states
    pgf_z,  # f8[m] evaluation points for the system-size pgf
    want_trace,
    trace_limit,
):
    n = rates.shape[0]
    inf = np.inf

    per_source = np.zeros((n, PS_COLS), dtype=np.float64)
    scalars = np.zeros(SC_COLS, dtype=np.float64)
    n_pgf = pgf_z.shape[0]
    pgf_area = np.zeros(n_pgf, dtype=np.float64)

    # FCFS queue ring buffer.
    q_src = np.empty(1024, dtype=np.int64)
    q_gen = np.empty(1024, dtype=np.float64)
    q_x = np.empty(1024, dtype=np.float64)
    q_cls = np.empty(1024, dtype=np.int64)
    q_head = 0
    q_count = 0

    tcap = 4096 if want_trace else 1
    trace = (
        np.empty(tcap, dtype=np.float64),
        np.empty(tcap, dtype=np.int64),
        np.empty(tcap, dtype=np.int64),
        np.empty(tcap, dtype=np.int64),
        np.empty(tcap, dtype=np.int64),
    )
    n_tr = 0
    tracing = want_trace
    trace_truncated = False

    # Per-source age state.
    timestamp = np.zeros(n, dtype=np.float64)  # newest delivered generation time
    anchor = np.zeros(n, dtype=np.float64)  # last accounting instant
    anchor_is_delivery = np.zeros(n, dtype=np.int64)
    last_arrival = np.zeros(n, dtype=np.float64)
    arriv_total = np.zeros(n, dtype=np.int64)
    deliv_total = np.zeros(n, dtype=np.int64)

    next_arr = np.empty(n, dtype=np.float64)
    for k in range(n):
        next_arr[k] = xo_exponential(states, k, 1.0 / rates[k])

    s_service = n
    s_failure = n + 1
    s_repair = n + 2

    mode = MODE_IDLE
    cur_src = -1
    cur_gen = 0.0
    cur_w = 0.0
    cur_svc = 0.0
    cur_rep_own = 0.0
    remaining = 0.0
    t_svc_end = inf
    t_fail = inf
    t_rep_end = inf

    now = 0.0
    stat_start = 0.0
    identity_err = 0.0
    max_qlen = 0

    if horizon_mode == HORIZON_DELIVERIES:
        horizon_total = int(horizon_value)
        warmup_target = int(warmup_frac * horizon_value)
        cut_time = inf
        t_end = inf
        cut_done = warmup_target == 0
    else:
        horizon_total = -1
        warmup_target = -1
        cut_time = warmup_frac * horizon_value
        t_end = horizon_value
        cut_done = cut_time <= 0.0

    while True:
        # Next event: scan candidates in tie-break priority order, strict <.
        best_t = inf
        best_ev = -1
        best_src = -1
        if mode == MODE_SERVING:
            best_t = t_svc_end
            best_ev = EV_DEPARTURE
        elif mode == MODE_REPAIRING:
            best_t = t_rep_end
            best_ev = EV_REPAIR
        for k in range(n):
            if next_arr[k] < best_t:
                best_t = next_arr[k]
                best_ev = EV_ARRIVAL
                best_src = k
        if mode == MODE_SERVING and t_fail < best_t:
            best_t = t_fail
            best_ev = EV_FAILURE

        # Time-horizon warmup cut happens between events.
        if not cut_done and best_t > cut_time:
            now = cut_time
            cut_done = True
            stat_start = cut_time
            for k in range(n):
                anchor[k] = cut_time
                anchor_is_delivery[k] = 0

        # Advance the state-occupancy integrals to min(event, end).
        t_to = best_t if best_t <= t_end else t_end
        dt = t_to - now
        if cut_done and dt > 0.0:
            if mode == MODE_IDLE:
                scalars[SC_IDLE_TIME] += dt
            if mode != MODE_REPAIRING:
                scalars[SC_AVAIL_TIME] += dt
            n_sys = q_count + (0 if mode == MODE_IDLE else 1)
            scalars[SC_SIZE_AREA] += n_sys * dt
            for zi in range(n_pgf):
                pgf_area[zi] += pgf_z[zi] ** n_sys * dt
        now = t_to
        if best_t > t_end:
            break

        finished = False

        if best_ev == EV_DEPARTURE:
            src = cur_src
            sojourn = now - cur_gen
            err = abs(sojourn - (cur_w + cur_svc + cur_rep_own))
            if err > identity_err:
                identity_err = err
            if cut_done:
                piece = _area_piece(anchor[src], timestamp[src], now)
                per_source[src, PS_AREA] += piece
                if anchor_is_delivery[src] == 1:
                    per_source[src, PS_SUM_B] += piece
                    per_source[src, PS_CNT_B] += 1.0
                per_source[src, PS_DELIV_POST] += 1.0
                if cur_gen >= stat_start:
                    per_source[src, PS_SUM_T] += sojourn
                    per_source[src, PS_CNT_T] += 1.0
            timestamp[src] = cur_gen
            anchor[src] = now
            anchor_is_delivery[src] = 1 if cut_done else 0
            deliv_total[src] += 1

            if q_count > 0:
                nsrc = q_src[q_head]
                ngen = q_gen[q_head]
                nx = q_x[q_head]
                ncls = q_cls[q_head]
                q_head = (q_head + 1) % q_src.shape[0]
                q_count -= 1
                cur_src = nsrc
                cur_gen = ngen
                cur_w = now - ngen
                cur_svc = _draw(
                    svc_code[nsrc],
                    svc_par[nsrc, 0],
                    svc_par[nsrc, 1],
                    svc_par[nsrc, 2],
                    states,
                    s_service,
                )
                cur_rep_own = 0.0
                remaining = cur_svc
                t_svc_end = now + remaining
                t_fail = now + xo_exponential(states, s_failure, 1.0 / alpha) if alpha > 0.0 else inf
                mode = MODE_SERVING
                if cut_done and ngen >= stat_start:
                    per_source[nsrc, PS_SUM_W] += cur_w
                    per_source[nsrc, PS_CNT_W] += 1.0
                    if ncls != 0:
                        per_source[nsrc, PS_SUM_XW] += nx * cur_w
                        per_source[nsrc, PS_CNT_XW] += 1.0
            else:
                mode = MODE_IDLE
                cur_src = -1
                t_svc_end = inf
                t_fail = inf

            if tracing:
                trace, n_tr, tracing = _trace_push(
                    trace, n_tr, trace_limit, now, EV_DEPARTURE, src, q_count, mode
                )
                trace_truncated = trace_truncated or not tracing

            if horizon_mode == HORIZON_DELIVERIES and src == 0:
                if not cut_done and deliv_total[0] == warmup_target:
                    cut_done = True
                    stat_start = now
                    for k in range(n):
                        anchor[k] = now
                        anchor_is_delivery[k] = 0
                if deliv_total[0] == horizon_total:
                    finished = True

        elif best_ev == EV_REPAIR:
            mode = MODE_SERVING
            t_svc_end = now + remaining
            t_fail = now + xo_exponential(states, s_failure, 1.0 / alpha) if alpha > 0.0 else inf
            t_rep_end = inf
            if tracing:
                trace, n_tr, tracing = _trace_push(
                    trace, n_tr, trace_limit, now, EV_REPAIR, cur_src, q_count, mode
                )
                trace_truncated = trace_truncated or not tracing

        elif best_ev == EV_ARRIVAL:
            k = best_src
            if arriv_total[k] >= 1:
                x = now - last_arrival[k]
                cls = 1 if deliv_total[k] < arriv_total[k] else 2  # 1: prior still in system
            else:
                x = 0.0
                cls = 0
            arriv_total[k] += 1
            last_arrival[k] = now
            next_arr[k] = now + xo_exponential(states, k, 1.0 / rates[k])
            if cut_done:
                per_source[k, PS_ARRIV_POST] += 1.0
                if cls == 1:
                    per_source[k, PS_CNT_AB] += 1.0
                elif cls == 2:
                    per_source[k, PS_CNT_AL] += 1.0

            if mode == MODE_IDLE:
                cur_src = k
                cur_gen = now
                cur_w = 0.0
                cur_svc = _draw(
                    svc_code[k], svc_par[k, 0], svc_par[k, 1], svc_par[k, 2], states, s_service
                )
                cur_rep_own = 0.0
                remaining = cur_svc
                t_svc_end = now + remaining
                t_fail = now + xo_exponential(states, s_failure, 1.0 / alpha) if alpha > 0.0 else inf
                mode = MODE_SERVING
                if cut_done:
                    per_source[k, PS_CNT_W] += 1.0  # zero wait
                    if cls != 0:
                        per_source[k, PS_CNT_XW] += 1.0  # x * 0 contributes nothing
            else:
                if q_count == q_src.shape[0]:
                    q_src = _grow_i8(q_src, q_head, q_count)
                    q_gen = _grow_f8(q_gen, q_head, q_count)
                    q_x = _grow_f8(q_x, q_head, q_count)
                    q_cls = _grow_i8(q_cls, q_head, q_count)
                    q_head = 0
                idx = (q_head + q_count) % q_src.shape[0]
                q_src[idx] = k
                q_gen[idx] = now
                q_x[idx] = x
                q_cls[idx] = cls
                q_count += 1
                if q_count > max_qlen:
                    max_qlen = q_count

            if tracing:
                trace, n_tr, tracing = _trace_push(
                    trace, n_tr, trace_limit, now, EV_ARRIVAL, k, q_count, mode
                )
                trace_truncated = trace_truncated or not tracing

        else:  # EV_FAILURE
            remaining = t_svc_end - now
            rep = _draw(
                rep_code[cur_src],
                rep_par[cur_src, 0],
                rep_par[cur_src, 1],
                rep_par[cur_src, 2],
                states,
                s_repair,
            )
            cur_rep_own += rep
            t_rep_end = now + rep
            t_svc_end = inf
            t_fail = inf
            mode = MODE_REPAIRING
            if tracing:
                trace, n_tr, tracing = _trace_push(
                    trace, n_tr, trace_limit, now, EV_FAILURE, cur_src, q_count, mode
                )
                trace_truncated = trace_truncated or not tracing

        if finished:
            break

    # Close the open age pieces and totals at the end instant.
    end_time = now
    if cut_done:
        for k in range(n):
            per_source[k, PS_AREA] += _area_piece(anchor[k], timestamp[k], end_time)
    for k in range(n):
        per_source[k, PS_DELIV_TOTAL] = deliv_total[k]
        scalars[SC_DELIV_POST] += per_source[k, PS_DELIV_POST]
        scalars[SC_ARRIV_POST] += per_source[k, PS_ARRIV_POST]
    scalars[SC_END_TIME] = end_time
    scalars[SC_STAT_START] = stat_start
    scalars[SC_STAT_TIME] = end_time - stat_start
    scalars[SC_IDENTITY_ERR] = identity_err
    scalars[SC_MAX_QLEN] = max_qlen

    tr_time, tr_type, tr_src, tr_qlen, tr_mode = trace
    return (
        scalars,
        per_source,
        pgf_area,
        tr_time[:n_tr],
        tr_type[:n_tr],
        tr_src[:n_tr],
        tr_qlen[:n_tr],
        tr_mode[:n_tr],
        trace_truncated,
    )
