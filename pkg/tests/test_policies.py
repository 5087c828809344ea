import math

import numpy as np
import pytest

from cogmac.model import SlottedChannelParams
from cogmac.slotted.policies import (
    PolicyDecision,
    UcbState,
    fixed_sequence_baseline,
    greedy_access,
    learning_schedule,
    select_sense_set,
    ucb_index,
    whittle_slot_reward,
)


class TestGreedyAccess:
    def test_strict_max(self):
        assert greedy_access([0.9, 0.5], [1.0, 1.0]) == 0

    def test_bandwidth_weighting(self):
        assert greedy_access([0.5, 0.9], [2.0, 1.0]) == 0

    def test_tie_breaks_low(self):
        assert greedy_access([0.5, 0.5], [1.0, 1.0]) == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            greedy_access([], [])

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            om = rng.random(6)
            bw = rng.uniform(0.5, 2.0, 6)
            assert greedy_access(om, bw) == greedy_access(om, 7.3 * bw)


class TestSelectSenseSet:
    def test_full_sensing(self):
        d = select_sense_set([0.5, 0.6, 0.7], [0.1, 0.2, 0.3], [1, 1, 1], 3)
        assert d.sense_set == (0, 1, 2)

    def test_single_channel(self):
        d = select_sense_set([0.5, 0.9], [0.4, 0.2], [1, 1], 1)
        assert d.sense_set == (1,)
        assert d.access_channel == 1

    def test_reference_example(self):
        d = select_sense_set([0.9, 0.8, 0.7], [0.9, 0.5, 0.1], [1, 1, 1], 2)
        assert d.access_channel == 0
        assert d.sense_set == (0, 2)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        w, om, bw = rng.random(5), rng.random(5), rng.uniform(0.5, 2, 5)
        a = select_sense_set(w, om, bw, 3)
        b = select_sense_set(w, om, bw, 3)
        assert a == b

    def test_scale_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            w, om = rng.random(5), rng.random(5)
            bw = rng.uniform(0.5, 2.0, 5)
            assert select_sense_set(w, om, bw, 2) == \
                select_sense_set(w, om, 3.1 * bw, 2)

    def test_bad_l_rejected(self):
        with pytest.raises(ValueError):
            select_sense_set([0.5], [0.5], [1.0], 2)


class TestWhittleSlotReward:
    def test_single_sensing(self):
        d = PolicyDecision(access_channel=1, sense_set=(1,))
        assert whittle_slot_reward(d, [0.3, 0.8], [0.1, 0.2]) == \
            pytest.approx(0.8)

    def test_reference_example(self):
        d = select_sense_set([0.9, 0.8, 0.7], [0.9, 0.5, 0.1], [1, 1, 1], 2)
        assert whittle_slot_reward(d, [0.9, 0.8, 0.7], [0.9, 0.5, 0.1]) == \
            pytest.approx(1.5)

    def test_vanishing_exploration_term(self):
        w = np.array([0.4, 0.6, 0.5])
        d = select_sense_set(w, w, [1, 1, 1], 3)
        assert whittle_slot_reward(d, w, w) == pytest.approx(0.6)


class TestUcbIndex:
    def test_reference_value(self):
        # formula spot check at ln j = 2 exactly
        st = UcbState(successes=np.array([5]), attempts=np.array([10]),
                      slot=math.e ** 2)
        got = ucb_index(st, 0)
        assert got == pytest.approx(0.5 + math.sqrt(0.4), rel=1e-12)
        assert got == pytest.approx(1.13246, abs=1e-5)

    def test_first_slot_no_bonus(self):
        st = UcbState(successes=np.array([1]), attempts=np.array([1]), slot=1)
        assert ucb_index(st, 0) == pytest.approx(1.0)

    def test_monotone_in_slot(self):
        prev = -1.0
        for j in (2, 5, 20, 100, 10_000):
            st = UcbState(successes=np.array([3]), attempts=np.array([7]),
                          slot=j)
            cur = ucb_index(st, 0)
            assert cur > prev
            prev = cur

    def test_unseeded_channel_rejected(self):
        st = UcbState(successes=np.array([0, 0]), attempts=np.array([1, 0]),
                      slot=1)
        with pytest.raises(ZeroDivisionError):
            ucb_index(st, 1)

    def test_state_invariants(self):
        with pytest.raises(ValueError):
            UcbState(successes=np.array([3]), attempts=np.array([2]), slot=5)
        with pytest.raises(ValueError):
            UcbState(successes=np.array([-1]), attempts=np.array([2]), slot=5)


class TestLearningSchedule:
    def test_single_group(self):
        phases = learning_schedule(5, 5, 20)
        assert phases == [((0, 20), (0, 1, 2, 3, 4))]

    def test_one_by_one(self):
        phases = learning_schedule(5, 1, 20)
        assert len(phases) == 5
        assert phases[-1] == ((80, 100), (4,))

    def test_ceiling_split(self):
        phases = learning_schedule(5, 2, 10)
        assert [p[1] for p in phases] == [(0, 1), (2, 3), (4,)]
        assert phases[-1][0] == (20, 30)

    def test_every_channel_once(self):
        for n, l in ((7, 3), (4, 4), (9, 2)):
            phases = learning_schedule(n, l, 5)
            seen = [c for _, chans in phases for c in chans]
            assert sorted(seen) == list(range(n))


class TestFixedSequenceBaseline:
    def test_single_channel(self):
        assert fixed_sequence_baseline([SlottedChannelParams(0.4, 0.6)]) == 0

    def test_prefers_high_stationary(self):
        chans = [SlottedChannelParams(0.2, 0.6),   # pi = 1/3
                 SlottedChannelParams(0.9, 0.9)]   # pi = 0.9
        assert fixed_sequence_baseline(chans) == 1

    def test_tie_breaks_low(self):
        chans = [SlottedChannelParams(0.9, 0.9), SlottedChannelParams(0.9, 0.9)]
        assert fixed_sequence_baseline(chans) == 0

    def test_bandwidth_weighting(self):
        chans = [SlottedChannelParams(0.5, 0.5, bandwidth=2.0),
                 SlottedChannelParams(0.9, 0.9, bandwidth=1.0)]
        assert fixed_sequence_baseline(chans) == 0
