"""Slot-level Monte Carlo simulator of the slotted protocols.

Each run draws one uniform per slot and channel for the primary chains and
one for the sensing noise up front, from streams split deterministically
off the run seed.  Policy choice therefore never perturbs the channel
sample paths, which keeps policy comparisons low-variance, and identical
seeds give bit-identical results on both the compiled and fallback paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..model import SensingModel, SlottedChannelParams, steady_state_free_prob
from . import _kernels as K
from .policies import fixed_sequence_baseline
from .whittle import WhittleConfig, build_index_table

POLICIES = {
    "full_sensing_informed": K.POLICY_FULL_INFORMED,
    "full_sensing_blind": K.POLICY_FULL_BLIND,
    "whittle_informed": K.POLICY_WHITTLE_INFORMED,
    "whittle_blind": K.POLICY_WHITTLE_BLIND,
    "greedy_informed": K.POLICY_GREEDY_INFORMED,
    "ucb": K.POLICY_UCB,
    "fixed_baseline": K.POLICY_FIXED,
}

_FULL_POLICIES = {"full_sensing_informed", "full_sensing_blind"}
_WHITTLE_POLICIES = {"whittle_informed", "whittle_blind"}

# estimates are quantized to this lattice when used as index-table keys, so
# repeated runs share cached tables; beliefs always use the exact estimates
_TABLE_QUANT = 100


@dataclass(frozen=True)
class SlottedConfig:
    """Scenario description for one slotted experiment."""

    channels: tuple[SlottedChannelParams, ...]
    sensing: SensingModel
    L: int
    horizon: int
    policy: str
    learning_period: int = 0
    seed: int = 0
    block_count: int = 1
    access_gated_counting: bool = False
    learning_phase_access: bool = False
    whittle: WhittleConfig = field(default_factory=lambda: WhittleConfig(
        discount=0.999, grid_points=1001))
    whittle_refresh_base: int = 64

    def __post_init__(self):
        n = len(self.channels)
        if n < 1:
            raise ValueError("need at least one channel")
        for i, ch in enumerate(self.channels):
            if ch.p01 == 0.0 and ch.p11 == 1.0:
                from ..errors import DegenerateChainError
                raise DegenerateChainError(
                    f"channel {i} has p01=0 and p11=1: no unique stationary "
                    "distribution")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; choose from "
                             f"{sorted(POLICIES)}")
        if not 1 <= self.L <= n:
            raise ValueError(f"need 1 <= L <= {n}, got L={self.L}")
        if self.policy in _FULL_POLICIES and self.L != n:
            raise ValueError(f"{self.policy} requires L == N == {n}")
        if self.policy == "ucb" and self.L != 1:
            raise ValueError("ucb senses a single channel; set L = 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.learning_period < 0:
            raise ValueError("learning_period must be >= 0")
        if self.block_count < 1:
            raise ValueError("block_count must be >= 1")

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def lp_total(self) -> int:
        if self.policy != "whittle_blind":
            return 0
        return math.ceil(self.n_channels / self.L) * self.learning_period


@dataclass(frozen=True)
class RunResult:
    """Outcome of one simulated block of slots."""

    throughput_per_slot: np.ndarray  # cumulative average trace
    slot_reward: np.ndarray          # credited bandwidth per slot
    total_successes: int
    collisions: int
    resync_events: int
    sync_violations: int
    impossible_evidence_events: int
    access_log: np.ndarray
    ack_log: np.ndarray
    sensed_log: np.ndarray
    resync_log: np.ndarray

    @property
    def mean_throughput(self) -> float:
        return float(self.throughput_per_slot[-1])


@dataclass(frozen=True)
class MonteCarloResult:
    """Seed-averaged traces and per-run summaries."""

    mean_trace: np.ndarray        # cumulative average, averaged over runs
    mean_slot_reward: np.ndarray  # per-slot credited bandwidth, run-averaged
    per_run_mean: np.ndarray
    runs: int
    total_successes: float
    collisions: float
    resync_events: float
    sync_violations: int
    impossible_evidence_events: int

    @property
    def mean_throughput(self) -> float:
        return float(self.per_run_mean.mean())

    @property
    def stderr(self) -> float:
        if self.runs < 2:
            return 0.0
        return float(self.per_run_mean.std(ddof=1) / math.sqrt(self.runs))

    def window_mean(self, start: int, stop: int) -> float:
        """Mean credited bandwidth over slots [start, stop)."""
        return float(self.mean_slot_reward[start:stop].mean())


def _true_param_arrays(channels):
    p01 = np.array([c.p01 for c in channels])
    p11 = np.array([c.p11 for c in channels])
    bw = np.array([c.bandwidth for c in channels])
    return p01, p11, bw


def _whittle_refresh_slots(config: SlottedConfig) -> list[int]:
    points = []
    step = max(config.whittle_refresh_base, 1)
    j = config.lp_total + step
    while j < config.horizon:
        points.append(j)
        step *= 2
        j = config.lp_total + step
    return points


def _build_tables(config: SlottedConfig, p01: np.ndarray, p11: np.ndarray,
                  quantize: bool) -> np.ndarray:
    rows = []
    for a, b in zip(p01, p11):
        if quantize:
            a = round(a * _TABLE_QUANT) / _TABLE_QUANT
            b = round(b * _TABLE_QUANT) / _TABLE_QUANT
        grid, w = build_index_table(float(a), float(b), config.whittle,
                                    omega_points=257, subsidy_points=257)
        rows.append(w)
    return np.ascontiguousarray(np.stack(rows))


def simulate_slotted(config: SlottedConfig, seed: int | None = None) -> RunResult:
    """Simulate one block of slots; deterministic given the seed."""
    if seed is None:
        seed = config.seed
    n = config.n_channels
    t = config.horizon
    p01, p11, bw = _true_param_arrays(config.channels)
    policy = POLICIES[config.policy]

    root = np.random.SeedSequence(entropy=(int(seed), 0x51077ED))
    ss_chan, ss_sense, ss_init = root.spawn(3)
    u_chan = np.random.default_rng(ss_chan).random((t, n))
    u_sense = np.random.default_rng(ss_sense).random((t, n))
    pis = np.array([steady_state_free_prob(c) for c in config.channels])
    s = (np.random.default_rng(ss_init).random(n) < pis).astype(np.int8)

    informed = config.policy in ("full_sensing_informed", "whittle_informed",
                                 "greedy_informed", "fixed_baseline")
    if informed:
        omega0 = pis.copy()
        est01, est11 = p01.copy(), p11.copy()
    else:
        omega0 = np.full(n, 0.5)
        est01 = np.full(n, 0.5)
        est11 = np.full(n, 0.5)

    omega_bar = omega0.copy()
    omega_tx = omega0.copy()
    rx_omega_bar = omega0.copy()
    pbar01, pbar11 = est01.copy(), est11.copy()
    rx_pbar01, rx_pbar11 = est01.copy(), est11.copy()
    phat01, phat11 = est01.copy(), est11.copy()
    cnt = np.zeros((n, 4), np.int64)
    n1 = np.zeros(n, np.int64)
    nobs = np.zeros(n, np.int64)
    prev_sensed = np.full(n, -1, np.int8)
    ucb_x = np.zeros(n, np.int64)
    ucb_y = np.zeros(n, np.int64)
    flags = np.zeros(K.N_FLAGS, np.int64)
    flags[K.F_LAST_ACK] = 1
    flags[K.F_PREV_ISTAR] = -1
    fixed_ch = fixed_sequence_baseline(config.channels) \
        if config.policy == "fixed_baseline" else -1

    succ = np.zeros(t)
    log_istar = np.full(t, -1, np.int32)
    log_ack = np.zeros(t, np.uint8)
    log_sensed = np.full((t, n), -1, np.int8)
    log_resync = np.zeros(t, np.uint8)

    if config.policy == "whittle_informed":
        wtab = _build_tables(config, p01, p11, quantize=False)
        boundaries = [0, t]
    elif config.policy == "whittle_blind":
        wtab = np.zeros((n, 257))
        boundaries = [0]
        boundaries.extend(b for b in ([config.lp_total]
                                      + _whittle_refresh_slots(config))
                          if 0 < b < t)
        boundaries.append(t)
    else:
        wtab = np.zeros((n, 2))
        boundaries = [0, t]

    for j0, j1 in zip(boundaries[:-1], boundaries[1:]):
        if config.policy == "whittle_blind" and j0 >= config.lp_total:
            if not (np.array_equal(pbar01, rx_pbar01)
                    and np.array_equal(pbar11, rx_pbar11)):
                raise AssertionError("shared estimates diverged between endpoints")
            wtab = _build_tables(config, pbar01, pbar11, quantize=True)
        K.slot_loop(j0, j1, policy, config.L, config.learning_period,
                    config.lp_total, 1 if config.access_gated_counting else 0,
                    1 if config.learning_phase_access else 0,
                    u_chan, u_sense, p01, p11, bw,
                    config.sensing.p_fa, config.sensing.p_md,
                    s, omega_bar, omega_tx, rx_omega_bar,
                    pbar01, pbar11, rx_pbar01, rx_pbar11, phat01, phat11,
                    cnt, n1, nobs, prev_sensed, ucb_x, ucb_y, fixed_ch,
                    wtab, flags,
                    succ, log_istar, log_ack, log_sensed, log_resync)

    trace = np.cumsum(succ) / np.arange(1, t + 1)
    return RunResult(
        throughput_per_slot=trace,
        slot_reward=succ,
        total_successes=int(flags[K.F_SUCCESSES]),
        collisions=int(flags[K.F_COLLISIONS]),
        resync_events=int(flags[K.F_RESYNCS]),
        sync_violations=int(flags[K.F_SYNC_VIOLATIONS]),
        impossible_evidence_events=int(flags[K.F_IMPOSSIBLE]),
        access_log=log_istar,
        ack_log=log_ack,
        sensed_log=log_sensed,
        resync_log=log_resync,
    )


def run_seed(master_seed: int, run_index: int) -> int:
    """Per-run seed from the master seed; adding runs never shifts earlier ones."""
    return int(np.random.SeedSequence(
        entropy=(int(master_seed), int(run_index))).generate_state(1)[0])


def monte_carlo(config: SlottedConfig) -> MonteCarloResult:
    """Average ``block_count`` independent runs of the configured scenario."""
    t = config.horizon
    trace_sum = np.zeros(t)
    reward_sum = np.zeros(t)
    per_run = np.zeros(config.block_count)
    successes = collisions = resyncs = 0
    sync_v = impossible = 0
    for r in range(config.block_count):
        res = simulate_slotted(config, seed=run_seed(config.seed, r))
        trace_sum += res.throughput_per_slot
        reward_sum += res.slot_reward
        per_run[r] = res.mean_throughput
        successes += res.total_successes
        collisions += res.collisions
        resyncs += res.resync_events
        sync_v += res.sync_violations
        impossible += res.impossible_evidence_events
    runs = config.block_count
    return MonteCarloResult(
        mean_trace=trace_sum / runs,
        mean_slot_reward=reward_sum / runs,
        per_run_mean=per_run,
        runs=runs,
        total_successes=successes / runs,
        collisions=collisions / runs,
        resync_events=resyncs / runs,
        sync_violations=sync_v,
        impossible_evidence_events=impossible,
    )
