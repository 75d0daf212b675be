import math

import numpy as np
import pytest

from aoiq import (
    Deterministic,
    Exponential,
    SystemParams,
    availability,
    event_probs,
    idle_prob,
    mean_sojourn,
    mean_system_size,
    pgf_system,
)
from aoiq.des import (
    AoiTracker,
    ConfigError,
    SimConfig,
    run_experiment,
    run_replication,
    write_trace_csv,
)
from aoiq.des.runner import TRACE_HEADER

from conftest import REPAIR, fig3_params


class TestAoiTracker:
    def test_first_delivery_triangle(self):
        tracker = AoiTracker()
        piece = tracker.record_delivery(2.0, 1.0)
        assert piece == pytest.approx(2.0)  # area of the initial triangle
        assert tracker.anchor == 2.0 and tracker.timestamp == 1.0
        # age right after the drop is t - g = 1
        assert tracker.close(2.0) == pytest.approx(2.0)

    def test_periodic_pattern_matches_hand_trapezoids(self):
        # Deliveries at t = 1, 2, 3 of packets generated at t - 0.5.
        tracker = AoiTracker()
        total = tracker.record_delivery(1.0, 0.5)
        assert total == pytest.approx(0.5)
        piece = tracker.record_delivery(2.0, 1.5)
        # age runs 0.5 -> 1.5: trapezoid (0.5+1.5)/2 * 1 = 1.0
        assert piece == pytest.approx(1.0)
        piece = tracker.record_delivery(3.0, 2.5)
        assert piece == pytest.approx(1.0)
        # open piece, age 0.5 -> 1.0 over half a unit: (0.5+1.0)/2 * 0.5
        assert tracker.close(3.5) == pytest.approx(2.5 + 0.375)

    def test_out_of_order_delivery_rejected(self):
        tracker = AoiTracker()
        tracker.record_delivery(2.0, 1.0)
        with pytest.raises(RuntimeError):
            tracker.record_delivery(1.5, 1.2)  # time going backwards
        with pytest.raises(RuntimeError):
            tracker.record_delivery(3.0, 0.5)  # stale generation time
        with pytest.raises(RuntimeError):
            tracker.record_delivery(3.0, 4.0)  # generated in the future


class TestConfig:
    def test_exactly_one_horizon(self, mm1_params):
        with pytest.raises(ConfigError):
            SimConfig(params=mm1_params, horizon_deliveries=100, horizon_time=10.0)
        with pytest.raises(ConfigError):
            SimConfig(params=mm1_params, horizon_deliveries=None, horizon_time=None)

    def test_rejects_bad_values(self, mm1_params):
        with pytest.raises(ConfigError):
            SimConfig(params=mm1_params, horizon_deliveries=0)
        with pytest.raises(ConfigError):
            SimConfig(params=mm1_params, horizon_deliveries=10, warmup_fraction=1.0)
        with pytest.raises(ConfigError):
            SimConfig(params=mm1_params, horizon_deliveries=10, replications=0)

    def test_replication_index_range(self, mm1_params):
        cfg = SimConfig(params=mm1_params, horizon_deliveries=10, replications=2)
        with pytest.raises(ConfigError):
            run_replication(cfg, 2)


class TestDeterminism:
    def test_identical_replications(self):
        cfg = SimConfig(
            params=fig3_params("h2", 3, 0.5),
            horizon_deliveries=3000,
            replications=2,
            master_seed=123,
        )
        a = run_replication(cfg, 0)
        b = run_replication(cfg, 0)
        assert a.aaoi.tolist() == b.aaoi.tolist()
        assert a.e_xw.tolist() == b.e_xw.tolist()
        assert a.stat_time == b.stat_time
        assert a.pgf_values.tolist() == b.pgf_values.tolist()

    def test_replications_differ_from_each_other(self):
        cfg = SimConfig(
            params=fig3_params("h2", 3, 0.5),
            horizon_deliveries=3000,
            replications=2,
            master_seed=123,
        )
        a = run_replication(cfg, 0)
        b = run_replication(cfg, 1)
        assert a.aaoi[0] != b.aaoi[0]

    def test_single_replication_has_no_interval(self, mm1_params):
        cfg = SimConfig(params=mm1_params, horizon_deliveries=500, replications=1)
        rep = run_experiment(cfg)
        assert rep.source(1).aaoi.ci95 is None
        assert rep.source(1).aaoi.se is None

    def test_intervals_positive_with_replications(self, mm1_run):
        _, rep = mm1_run
        assert rep.source(1).aaoi.ci95 > 0
        assert rep.idle_fraction.ci95 > 0


class TestDegenerateCases:
    def test_no_arrivals_within_time_horizon(self):
        params = SystemParams((1e-9,), Exponential(2.0), REPAIR, alpha=0.1)
        cfg = SimConfig(
            params=params, horizon_deliveries=None, horizon_time=1.0,
            warmup_fraction=0.0, replications=1, master_seed=5,
        )
        rep = run_experiment(cfg)
        assert rep.total_deliveries == 0
        assert rep.availability_fraction.mean == 1.0
        assert rep.idle_fraction.mean == 1.0

    def test_lone_customer_deterministic_service(self):
        params = SystemParams((1e-6,), Deterministic(0.5), REPAIR, alpha=0.0)
        cfg = SimConfig(
            params=params, horizon_deliveries=1, warmup_fraction=0.0,
            replications=1, master_seed=5,
        )
        rep = run_experiment(cfg)
        s = rep.source(1)
        assert s.deliveries == 1
        assert s.mean_sojourn.mean == pytest.approx(0.5, abs=1e-12)
        assert s.mean_waiting.mean == 0.0


class TestStructuralInvariants:
    def test_sojourn_identity_every_packet(self, breakdown_run):
        _, rep = breakdown_run
        assert rep.identity_error_max < 1e-9

    def test_idle_below_availability(self, breakdown_run):
        _, rep = breakdown_run
        assert rep.idle_fraction.mean <= rep.availability_fraction.mean

    def test_no_failures_means_full_availability(self, mm1_run):
        _, rep = mm1_run
        assert rep.availability_fraction.mean == 1.0

    def test_two_aaoi_estimators_agree(self, breakdown_run):
        _, rep = breakdown_run
        s = rep.source(1)
        scale = math.hypot(s.aaoi.se, s.aaoi_cycle.se)
        assert abs(s.aaoi.mean - s.aaoi_cycle.mean) < 4 * scale

    def test_heterogeneous_laws_simulate(self):
        params = SystemParams(
            (0.3, 0.2),
            (Deterministic(0.2), Exponential(1.25)),
            (REPAIR, Exponential(5.0)),
            alpha=0.2,
        )
        cfg = SimConfig(params=params, horizon_deliveries=4000, replications=4, master_seed=3)
        rep = run_experiment(cfg)
        assert rep.identity_error_max < 1e-9
        assert rep.source(1).deliveries > 0 and rep.source(2).deliveries > 0


class TestAgainstClosedForms:
    def test_mm1_aaoi(self, mm1_run):
        _, rep = mm1_run
        est = rep.source(1).aaoi
        assert abs(est.z_score(3.5)) < 3.0

    def test_steady_state_fractions(self, breakdown_run):
        cfg, rep = breakdown_run
        p = cfg.params
        assert abs(rep.idle_fraction.z_score(idle_prob(p))) < 4.0
        assert abs(rep.availability_fraction.z_score(availability(p))) < 4.0
        assert abs(rep.mean_system_size.z_score(mean_system_size(p))) < 4.0

    def test_system_size_pgf(self, breakdown_run):
        cfg, rep = breakdown_run
        for z, est in rep.pgf:
            assert abs(est.z_score(pgf_system(cfg.params, z))) < 4.0

    def test_sojourn_mean(self, breakdown_run):
        cfg, rep = breakdown_run
        assert abs(rep.source(1).mean_sojourn.z_score(mean_sojourn(cfg.params))) < 4.0

    def test_event_classification_probability(self):
        params = fig3_params("erlang2", 2, 0.3)
        cfg = SimConfig(params=params, horizon_deliveries=10_000, replications=30, master_seed=21)
        rep = run_experiment(cfg)
        target = event_probs(params, 1).p_l
        assert abs(rep.source(1).p_l.z_score(target)) < 4.0


@pytest.fixture(scope="module")
def traced_run():
    params = SystemParams((0.4, 0.25), Exponential(2.0), REPAIR, alpha=0.15)
    cfg = SimConfig(
        params=params, horizon_deliveries=None, horizon_time=2000.0,
        warmup_fraction=0.0, replications=1, master_seed=17,
    )
    stats, trace = run_replication(cfg, 0, trace=True)
    return cfg, stats, trace


class TestTrace:
    def test_schema_and_order(self, traced_run, tmp_path):
        _, _, trace = traced_run
        assert not trace.truncated
        assert len(trace) > 100
        assert np.all(np.diff(trace.times) >= 0)
        path = tmp_path / "trace.csv"
        write_trace_csv(path, trace)
        lines = path.read_text().splitlines()
        assert lines[0] == TRACE_HEADER
        _, ev, src, qlen, mode = lines[1].split(",")
        assert ev in {"arrival", "departure", "failure", "repair"}
        assert mode in {"idle", "serving", "repairing"}
        assert int(src) >= 1 and int(qlen) >= 0

    def test_age_reconstruction_from_trace(self, traced_run):
        # Rebuild each source's age process from public trace events alone;
        # the closed-form area in the core must match it exactly.
        cfg, stats, trace = traced_run
        n = cfg.params.n_sources
        trackers = [AoiTracker() for _ in range(n)]
        pending = [[] for _ in range(n)]  # FIFO generation times per source
        for t, ev, src, _, _ in zip(
            trace.times, trace.event_types, trace.sources, trace.queue_lens, trace.server_modes
        ):
            if ev == 0:  # arrival
                pending[src].append(t)
            elif ev == 1:  # departure
                gen = pending[src].pop(0)
                trackers[src].record_delivery(t, gen)
        end = stats.end_time
        for k in range(n):
            rebuilt = trackers[k].close(end) / end
            assert rebuilt == pytest.approx(stats.aaoi[k], rel=1e-12)

    def test_classification_reconstruction_from_trace(self, traced_run):
        # Recompute the departed/in-system classification per arrival from
        # the trace and match the simulator's p_l estimate exactly.
        cfg, stats, trace = traced_run
        n = cfg.params.n_sources
        arrived = [0] * n
        delivered = [0] * n
        counts = [[0, 0] for _ in range(n)]  # [prior-in-system, prior-departed]
        for ev, src in zip(trace.event_types, trace.sources):
            if ev == 0:
                if arrived[src] >= 1:
                    if delivered[src] < arrived[src]:
                        counts[src][0] += 1
                    else:
                        counts[src][1] += 1
                arrived[src] += 1
            elif ev == 1:
                delivered[src] += 1
        for k in range(n):
            total = counts[k][0] + counts[k][1]
            assert stats.p_l[k] == pytest.approx(counts[k][1] / total, abs=1e-12)

    def test_failures_only_while_serving(self, traced_run):
        _, _, trace = traced_run
        # A failure row always shows the server repairing afterwards, and
        # must be preceded by a serving state.
        mode_before = 0
        for ev, mode in zip(trace.event_types, trace.server_modes):
            if ev == 2:  # failure
                assert mode == 2
                assert mode_before == 1
            mode_before = mode

    def test_work_conservation(self, traced_run):
        # The server is never idle while packets wait.
        _, _, trace = traced_run
        for qlen, mode in zip(trace.queue_lens, trace.server_modes):
            if mode == 0:
                assert qlen == 0

    def test_trace_limit_truncates(self):
        params = SystemParams((0.5,), Exponential(2.0), REPAIR, alpha=0.1)
        cfg = SimConfig(params=params, horizon_deliveries=2000, replications=1, master_seed=9)
        stats, trace = run_replication(cfg, 0, trace=True, trace_limit=100)
        assert trace.truncated
        assert len(trace) == 100
        # statistics are unaffected by trace truncation
        untraced = run_replication(cfg, 0)
        assert untraced.aaoi[0] == stats.aaoi[0]


class TestWarmup:
    def test_delivery_warmup_reduces_measured_count(self):
        params = fig3_params("erlang2", 2, 0.5)
        cfg = SimConfig(
            params=params, horizon_deliveries=2000, warmup_fraction=0.25,
            replications=1, master_seed=31,
        )
        stats = run_replication(cfg, 0)
        assert stats.deliveries_total[0] == 2000
        assert stats.deliveries[0] == 1500

    def test_time_warmup_cuts_stat_window(self):
        params = fig3_params("erlang2", 2, 0.5)
        cfg = SimConfig(
            params=params, horizon_deliveries=None, horizon_time=1000.0,
            warmup_fraction=0.2, replications=1, master_seed=31,
        )
        stats = run_replication(cfg, 0)
        assert stats.stat_time == pytest.approx(800.0, abs=1e-9)
        assert stats.end_time == pytest.approx(1000.0, abs=1e-12)
