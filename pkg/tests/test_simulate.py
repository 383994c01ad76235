import math
from dataclasses import dataclass

import numpy as np
import pytest
from scipy import stats

from paoi_lab import (
    ChoiceSampler,
    Deterministic,
    Erlang,
    Exponential,
    FixedThreshold,
    MedianThreshold,
    Pareto,
    PointSampler,
    RandomizedThreshold,
    RepetitiveSequence,
    ServiceDistribution,
    SimulationStall,
    TwoPoint,
    UniformSampler,
    XMinThreshold,
    ZeroWait,
    aoi_trajectory,
    estimate_paoi,
    expected_interreception,
    expected_received_service,
    optimal_threshold,
    paoi_xmin,
    pooled_estimate,
    run_replications,
    simulate_peaks,
    simulate_randomized,
)


@dataclass
class Scripted(ServiceDistribution):
    """Replays a fixed list of service times; for hand-traced paths."""

    draws: tuple

    def __post_init__(self):
        self._queue = list(self.draws)

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        raise NotImplementedError

    def support_min(self):
        return 0.0

    def mean(self):
        raise NotImplementedError

    def truncated_first_moment(self, theta):
        raise NotImplementedError

    def integrated_cdf(self, theta):
        raise NotImplementedError

    def quantile(self, q):
        raise NotImplementedError

    def sample_batch(self, rng, n):
        out, self._queue = self._queue[:n], self._queue[n:]
        if len(out) < n:
            out = out + [0.0] * (n - len(out))
        return np.array(out)


class TestEventLoop:
    def test_hand_trace_zero_wait(self):
        # initial AoI 0, then services 1, 2, 3: receptions at 1, 3, 6 and
        # peaks 1, 3, 5
        d = Scripted((0.0, 1.0, 2.0, 3.0))
        records = simulate_peaks(d, ZeroWait(), peaks=3, seed=0)
        assert [r.peak for r in records] == [1.0, 3.0, 5.0]
        assert [r.receive_time for r in records] == [1.0, 3.0, 6.0]
        assert [r.received_service for r in records] == [0.0, 1.0, 2.0]
        assert [r.interreception for r in records] == [1.0, 2.0, 3.0]
        assert all(r.preemptions == 0 for r in records)

    def test_hand_trace_with_preemption(self):
        # threshold 2: the 5.0 draw is cut at 2, then 1.5 completes
        d = Scripted((1.0, 5.0, 1.5, 0.5))
        records = simulate_peaks(d, FixedThreshold(2.0), peaks=2, seed=0)
        first = records[0]
        assert first.preemptions == 1
        assert first.interreception == 2.0 + 1.5
        assert first.peak == 1.0 + 3.5
        assert records[1].received_service == 1.5

    def test_threshold_tie_counts_as_reception(self):
        d = Scripted((1.0, 2.0))
        records = simulate_peaks(d, FixedThreshold(2.0), peaks=1, seed=0)
        assert records[0].preemptions == 0
        assert records[0].interreception == 2.0

    def test_deterministic_zero_wait(self):
        records = simulate_peaks(Deterministic(1.0), ZeroWait(), peaks=3, seed=99)
        assert [r.peak for r in records] == [2.0, 2.0, 2.0]

    def test_decomposition_identity(self):
        records = simulate_peaks(Erlang(2, 1.0), FixedThreshold(2.5), peaks=5000, seed=4)
        for r in records:
            assert r.peak == r.received_service + r.interreception
        # carried service chains across consecutive peaks and obeys the cap
        for prev, cur in zip(records, records[1:]):
            assert cur.received_service <= 2.5
            assert cur.receive_time == pytest.approx(
                prev.receive_time + cur.interreception
            )

    def test_work_conserving_no_idle_time(self):
        records = simulate_peaks(Exponential(1.0), FixedThreshold(1.0), peaks=2000, seed=8)
        t = 0.0
        for r in records:
            t += r.interreception
            assert r.receive_time == pytest.approx(t)

    def test_seed_determinism(self):
        a = simulate_peaks(Pareto(1.0, 2.0), FixedThreshold(2.0), peaks=500, seed=31)
        b = simulate_peaks(Pareto(1.0, 2.0), FixedThreshold(2.0), peaks=500, seed=31)
        assert a == b

    def test_warmup_drops_leading_peaks(self):
        full = simulate_peaks(Exponential(1.0), ZeroWait(), peaks=10, seed=5)
        tail = simulate_peaks(Exponential(1.0), ZeroWait(), peaks=7, seed=5, warmup=3)
        assert tail == full[3:]

    def test_stall_guard(self):
        with pytest.raises(SimulationStall):
            simulate_peaks(
                Exponential(1.0), FixedThreshold(0.0), peaks=1, seed=1, stall_limit=500
            )

    def test_xmin_policy_on_atom(self):
        tp = TwoPoint(1.0, 3.0, 0.5)
        records = simulate_peaks(tp, XMinThreshold(), peaks=100_000, seed=12)
        est = estimate_paoi(records)
        assert abs(est.mean - paoi_xmin(tp)) < 3 * est.std_error

    def test_preemption_counts_are_geometric(self):
        tp = TwoPoint(1.0, 3.0, 0.5)
        records = simulate_peaks(tp, FixedThreshold(1.0), peaks=100_000, seed=21)
        counts = np.array([r.preemptions for r in records])
        # success probability F(theta) = 0.5; pool the tail beyond 9
        kmax = 10
        observed = np.bincount(np.minimum(counts, kmax), minlength=kmax + 1)
        expected = np.array(
            [0.5 * 0.5**k for k in range(kmax)] + [0.5**kmax]
        ) * len(counts)
        chi = stats.chisquare(observed, expected)
        assert chi.pvalue > 0.01

    def test_component_means_match_analytics(self):
        d = Erlang(2, 1.0)
        theta = 2.0
        records = simulate_peaks(d, FixedThreshold(theta), peaks=100_000, seed=17)
        xr = np.array([r.received_service for r in records[1:]])  # skip initial draw
        y = np.array([r.interreception for r in records])
        ex = expected_received_service(d, theta)
        ey = expected_interreception(d, theta)
        assert abs(xr.mean() - ex) < 3 * xr.std(ddof=1) / math.sqrt(len(xr))
        assert abs(y.mean() - ey) < 3 * y.std(ddof=1) / math.sqrt(len(y))


class TestEstimator:
    def test_constant_peaks(self):
        records = simulate_peaks(Deterministic(1.0), ZeroWait(), peaks=3, seed=0)
        est = estimate_paoi(records)
        assert est.mean == 2.0 and est.std_error == 0.0
        assert est.ci95 == (2.0, 2.0)
        assert est.peak_count == 3

    def test_needs_two_peaks(self):
        records = simulate_peaks(Deterministic(1.0), ZeroWait(), peaks=1, seed=0)
        with pytest.raises(ValueError):
            estimate_paoi(records)

    def test_zero_wait_matches_twice_the_mean(self):
        records = simulate_peaks(Exponential(1.0), ZeroWait(), peaks=100_000, seed=3)
        est = estimate_paoi(records)
        assert abs(est.mean - 2.0) < 3 * est.std_error

    def test_fixed_threshold_matches_analytics(self):
        d = Erlang(2, 1.0)
        theta, zeta = optimal_threshold(d, 0.05, 20.0)
        records = simulate_peaks(d, FixedThreshold(theta), peaks=100_000, seed=13)
        est = estimate_paoi(records)
        assert est.ci_low <= zeta <= est.ci_high

    def test_ci_width_definition(self):
        records = simulate_peaks(Exponential(1.0), ZeroWait(), peaks=5000, seed=2)
        est = estimate_paoi(records)
        assert est.ci_high - est.ci_low == pytest.approx(2 * 1.96 * est.std_error)

    def test_pooling(self):
        ests = run_replications(
            Exponential(1.0), ZeroWait(), peaks=5000, replications=4, base_seed=100
        )
        assert [e.seed for e in ests] == [100, 101, 102, 103]
        pooled = pooled_estimate(ests, seed=100)
        assert pooled.peak_count == 20_000
        assert pooled.mean == pytest.approx(np.mean([e.mean for e in ests]))
        again = run_replications(
            Exponential(1.0), ZeroWait(), peaks=5000, replications=4, base_seed=100
        )
        assert ests == again


class TestTrajectory:
    def test_deterministic_sawtooth(self):
        points = aoi_trajectory(Deterministic(1.0), ZeroWait(), horizon=3.0, seed=0)
        assert [(p.time, p.peak, p.reset_to) for p in points] == [
            (1.0, 2.0, 1.0),
            (2.0, 2.0, 1.0),
            (3.0, 2.0, 1.0),
        ]

    def test_reset_value_is_received_service(self):
        points = aoi_trajectory(Erlang(2, 1.0), FixedThreshold(3.0), horizon=200.0, seed=6)
        for p in points:
            assert 0.0 < p.reset_to <= 3.0
            assert p.peak > p.reset_to

    def test_agrees_with_peak_simulation(self):
        d = Exponential(1.0)
        policy = FixedThreshold(1.5)
        points = aoi_trajectory(d, policy, horizon=100.0, seed=44)
        records = simulate_peaks(d, policy, peaks=len(points), seed=44)
        assert [p.time for p in points] == [r.receive_time for r in records]
        assert [p.peak for p in points] == [r.peak for r in records]


class TestRandomized:
    def test_point_mass_equals_fixed_policy(self):
        d = Erlang(3, 1.0)
        fixed = simulate_peaks(d, FixedThreshold(2.0), peaks=2000, seed=9)
        random_point = simulate_peaks(
            d, RandomizedThreshold(PointSampler(2.0)), peaks=2000, seed=9
        )
        assert fixed == random_point

    @pytest.mark.parametrize(
        "dist,window",
        [
            (Erlang(3, 1.0), (0.01, 30.0)),
            (Pareto(1.0, 2.0), (1.05, 60.0)),
        ],
    )
    def test_never_beats_optimal_fixed_threshold(self, dist, window):
        theta_opt, zeta_opt = optimal_threshold(dist, *window)
        samplers = [
            UniformSampler(max(theta_opt - 0.5, window[0]), theta_opt + 0.5),
            UniformSampler(theta_opt, 2 * theta_opt),
            ChoiceSampler((0.8 * theta_opt, 1.6 * theta_opt), (0.5, 0.5)),
        ]
        for sampler in samplers:
            est = simulate_randomized(dist, sampler, peaks=20_000, seed=71)
            assert est.mean >= zeta_opt - 3 * est.std_error

    def test_sequence_policy_runs(self):
        d = TwoPoint(1.0, 3.0, 0.5)
        records = simulate_peaks(
            d, RepetitiveSequence((1.0, 3.0)), peaks=20_000, seed=15
        )
        est = estimate_paoi(records)
        from paoi_lab import paoi_repetitive

        want = paoi_repetitive(d, RepetitiveSequence((1.0, 3.0))).zeta
        assert abs(est.mean - want) < 3 * est.std_error

    def test_median_threshold_sugar(self):
        d = Exponential(1.0)
        a = simulate_peaks(d, MedianThreshold(), peaks=1000, seed=2)
        b = simulate_peaks(d, FixedThreshold(d.quantile(0.5)), peaks=1000, seed=2)
        assert a == b


class TestParallelReplications:
    def test_worker_pool_matches_sequential(self):
        d = Exponential(1.0)
        seq = run_replications(d, ZeroWait(), peaks=2000, replications=4, base_seed=55)
        par = run_replications(
            d, ZeroWait(), peaks=2000, replications=4, base_seed=55, workers=2
        )
        assert seq == par
