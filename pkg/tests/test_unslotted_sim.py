import numpy as np
import pytest

import cogmac.unslotted._kernels as UK
from cogmac._accel import USING_NUMBA
from cogmac.model import SensingModel, UnslottedChannelParams
from cogmac.unslotted.analytics import PeriodPair, all_mean_intervals, \
    channel_metrics
from cogmac.unslotted.optimizer import single_channel_interference, \
    solve_access_period
from cogmac.unslotted.sim import simulate_multi, simulate_single

PERFECT = SensingModel.perfect()


def random_instance(seed, n=3):
    rng = np.random.default_rng(seed)
    params = [UnslottedChannelParams(*rng.uniform(0.08, 1.2, 2))
              for _ in range(n)]
    periods = [PeriodPair(*rng.uniform(0.2, 2.5, 2)) for _ in range(n)]
    return params, periods


class TestSimulateMulti:
    def test_matches_analytics_within_monte_carlo_error(self):
        params, periods = random_instance(1)
        mus = all_mean_intervals(params, periods, PERFECT)
        runs = [simulate_multi(params, periods, PERFECT, 0.0, 8000.0, seed=s)
                for s in range(60)]
        for i, (p, per) in enumerate(zip(params, periods)):
            m = channel_metrics(p, per, PERFECT, mus, 0.0)
            for attr, analytic in (
                    ("secondary_utilization", m.secondary_utilization),
                    ("interference", m.interference),
                    ("unexplored", m.unexplored)):
                vals = np.array([getattr(r, attr)[i] for r in runs])
                se = vals.std(ddof=1) / np.sqrt(len(runs))
                assert abs(vals.mean() - analytic) < 3.5 * se + 1e-4, \
                    f"channel {i} {attr}"

    def test_opportunity_conservation_event_exact(self):
        params, periods = random_instance(2)
        m = simulate_multi(params, periods, PERFECT, 0.01, 5000.0, seed=3,
                           collect_timeline=True)
        horizon = 5000.0
        flat = np.concatenate([e for e in m.timeline.epochs])
        off = np.zeros(len(params) + 1, np.int64)
        for i, e in enumerate(m.timeline.epochs):
            off[i + 1] = off[i] + e.shape[0]
        free_tot = np.zeros(len(params))
        UK.free_time_totals(flat, off, m.timeline.initial_states, horizon,
                            free_tot)
        for i in range(len(params)):
            # discovered free (used + paused) plus unexplored equals true free
            lhs = (m.useful[i] + m.overhead[i] + m.unexplored[i]) * horizon
            assert lhs == pytest.approx(free_tot[i], rel=1e-9, abs=1e-6)

    def test_reference_strict_empirical_rate(self, reference_channels, perfect_sensing):
        from cogmac.slotted.sim import run_seed
        from cogmac.unslotted.optimizer import InterferenceConstraint, \
            optimize_two_periods

        con = InterferenceConstraint.fraction_of_utilization(reference_channels, 0.25)
        res = optimize_two_periods(reference_channels, perfect_sensing, 0.01, con,
                                   n_starts=1)
        rates = np.array([
            simulate_multi(reference_channels, res.periods, perfect_sensing, 0.01,
                           1e4, seed=run_seed(9, s)).throughput
            for s in range(100)])
        assert rates.mean() == pytest.approx(3.8068, rel=0.03)

    def test_always_free_channel(self):
        params = [UnslottedChannelParams(1e-9, 1.0)]
        periods = [PeriodPair(0.5, 0.25)]
        m = simulate_multi(params, periods, PERFECT, 0.01, 2000.0, seed=4)
        assert m.interference[0] == 0.0
        assert m.secondary_utilization[0] > 0.99
        # the whole horizon is free: useful + overhead + unexplored sums to 1
        assert m.throughput == pytest.approx(
            1.0 - m.overhead[0] - m.unexplored[0], abs=1e-12)

    def test_zero_sensing_time_zero_overhead(self):
        params, periods = random_instance(5)
        m = simulate_multi(params, periods, PERFECT, 0.0, 3000.0, seed=5)
        assert (m.overhead == 0.0).all()

    def test_sensing_errors_shift_fractions(self):
        params, periods = random_instance(6)
        noisy = SensingModel(p_fa=0.2, p_md=0.1)
        a = simulate_multi(params, periods, PERFECT, 0.0, 3000.0, seed=6)
        b = simulate_multi(params, periods, noisy, 0.0, 3000.0, seed=6)
        assert not np.allclose(a.secondary_utilization,
                               b.secondary_utilization)
        assert b.interference.sum() > 0.0

    def test_determinism(self):
        params, periods = random_instance(7)
        a = simulate_multi(params, periods, PERFECT, 0.01, 2000.0, seed=9)
        b = simulate_multi(params, periods, PERFECT, 0.01, 2000.0, seed=9)
        np.testing.assert_array_equal(a.secondary_utilization,
                                      b.secondary_utilization)
        assert a.throughput == b.throughput

    def test_short_horizon_rejected(self):
        params, periods = random_instance(8)
        with pytest.raises(ValueError):
            simulate_multi(params, periods, PERFECT, 0.0, 10.0, seed=1)

    def test_sensing_events_never_overlap(self):
        params, periods = random_instance(9)
        m = simulate_multi(params, periods, PERFECT, 0.05, 3000.0, seed=10,
                           collect_timeline=True)
        tl = m.timeline
        order = np.argsort(tl.actions_start, kind="stable")
        starts = tl.actions_start[order]
        ends = tl.actions_end[order]
        assert (starts[1:] >= ends[:-1] - 1e-12).all()


class TestSimulateSingle:
    def test_interference_meets_constraint(self):
        rng = np.random.default_rng(20)
        params = [UnslottedChannelParams(*rng.uniform(0.1, 1.0, 2))
                  for _ in range(3)]
        imax = [0.3 * p.u for p in params]
        tf = [solve_access_period(p, PERFECT, im)
              for p, im in zip(params, imax)]
        runs = [simulate_single(params, tf, PERFECT, 0.01, 0.0, 8000.0, seed=s)
                for s in range(40)]
        for i in range(3):
            vals = np.array([r.interference[i] for r in runs
                             if r.secondary_utilization[i] > 0])
            se = vals.std(ddof=1) / np.sqrt(len(vals))
            assert vals.mean() <= imax[i] + 3 * se + 1e-4

    def test_no_sync_failures_perfect_sensing(self):
        params, _ = random_instance(21)
        tf = [solve_access_period(p, PERFECT, 0.3 * p.u) for p in params]
        total = sum(simulate_single(params, tf, PERFECT, 0.02, 0.0, 4000.0,
                                    seed=s).sync_failures for s in range(10))
        assert total == 0

    def test_always_free_back_to_back_blocks(self):
        params = [UnslottedChannelParams(1e-7, 1.0)]
        m = simulate_single(params, [0.5], PERFECT, 0.01, 0.0, 1000.0, seed=2)
        # per cycle: one sensing event then a full access period
        assert m.secondary_utilization[0] == pytest.approx(0.5 / 0.51,
                                                           abs=1e-3)
        assert m.mean_search_delay == pytest.approx(0.01, abs=1e-9)
        assert m.interference[0] == 0.0

    def test_single_antenna_never_overlaps(self):
        params, _ = random_instance(22)
        tf = [solve_access_period(p, PERFECT, 0.3 * p.u) for p in params]
        m = simulate_single(params, tf, PERFECT, 0.02, 0.0, 3000.0, seed=5,
                            collect_timeline=True)
        tl = m.timeline
        order = np.argsort(tl.actions_start, kind="stable")
        starts = tl.actions_start[order]
        ends = np.minimum(tl.actions_end[order], 3000.0)
        assert (starts[1:] >= ends[:-1] - 1e-9).all()

    def test_handshake_failures_under_miss_detection(self):
        params, _ = random_instance(23)
        noisy = SensingModel(p_fa=0.0, p_md=0.3)
        tf = [0.5] * len(params)
        m = simulate_single(params, tf, noisy, 0.02, 0.001, 4000.0, seed=6)
        assert m.handshake_failures > 0
        assert m.sync_failures == 0  # timeout rule repairs every divergence

    def test_requires_positive_sensing_time(self):
        params, _ = random_instance(24)
        with pytest.raises(ValueError):
            simulate_single(params, [0.5] * 3, PERFECT, 0.0, 0.0, 100.0, seed=1)

    def test_determinism(self):
        params, _ = random_instance(25)
        tf = [0.4] * len(params)
        a = simulate_single(params, tf, PERFECT, 0.01, 0.0, 2000.0, seed=4)
        b = simulate_single(params, tf, PERFECT, 0.01, 0.0, 2000.0, seed=4)
        np.testing.assert_array_equal(a.interference, b.interference)
        assert a.throughput == b.throughput


@pytest.mark.skipif(not USING_NUMBA, reason="fallback path is the only path")
class TestKernelEquivalence:
    def test_multi_compiled_vs_python(self, monkeypatch):
        params, periods = random_instance(30)
        compiled = simulate_multi(params, periods, PERFECT, 0.01, 1500.0,
                                  seed=8)
        monkeypatch.setattr(UK, "multi_channel_walk",
                            UK.multi_channel_walk.py_func)
        fallback = simulate_multi(params, periods, PERFECT, 0.01, 1500.0,
                                  seed=8)
        np.testing.assert_array_equal(compiled.secondary_utilization,
                                      fallback.secondary_utilization)
        np.testing.assert_array_equal(compiled.interference,
                                      fallback.interference)
        assert compiled.throughput == fallback.throughput

    def test_single_compiled_vs_python(self, monkeypatch):
        params, _ = random_instance(31)
        tf = [0.5] * len(params)
        compiled = simulate_single(params, tf, PERFECT, 0.02, 0.0, 1500.0,
                                   seed=9)
        monkeypatch.setattr(UK, "single_channel_walk",
                            UK.single_channel_walk.py_func)
        fallback = simulate_single(params, tf, PERFECT, 0.02, 0.0, 1500.0,
                                   seed=9)
        np.testing.assert_array_equal(compiled.interference,
                                      fallback.interference)
        assert compiled.throughput == fallback.throughput
        assert compiled.sense_events == fallback.sense_events
