"""Continuous-time simulators for the un-slotted protocols.

Channel occupancy is drawn as alternating exponential sojourns with the
initial state taken from the stationary distribution, so measured fractions
need no burn-in.  ``simulate_multi`` exercises the per-outcome sensing
periods on all channels simultaneously; ``simulate_single`` exercises the
hop-and-handshake protocol on one channel at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..model import SensingModel, UnslottedChannelParams
from . import _kernels as K
from .analytics import PeriodPair


@dataclass(frozen=True)
class EventTimeline:
    """Channel sample paths plus the secondary user's action log."""

    epochs: tuple[np.ndarray, ...]
    initial_states: np.ndarray
    actions_start: np.ndarray
    actions_end: np.ndarray
    actions_channel: np.ndarray
    actions_kind: np.ndarray  # 0 = sense, 1 = transmit


@dataclass(frozen=True)
class EmpiricalMetrics:
    """Measured per-channel time fractions over one simulated horizon.

    In multi-channel mode every fraction is of total time (interference is
    time transmitting on a truly busy channel / horizon).  In single-channel
    mode ``interference`` is per unit transmission time on that channel, the
    convention the access-period constraint is written in.
    """

    secondary_utilization: np.ndarray
    unexplored: np.ndarray
    interference: np.ndarray
    overhead: np.ndarray
    useful: np.ndarray
    throughput: float
    throughput_bins: np.ndarray
    handshake_failures: int
    sync_failures: int
    mean_search_delay: float
    sense_events: int
    timeline: EventTimeline | None = None


def _draw_epochs(params: UnslottedChannelParams, horizon: float,
                 rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Initial state and state-flip epochs covering (0, horizon]."""
    s0 = 1 if rng.random() < (1.0 - params.u) else 0
    rates = (params.lambda_free, params.lambda_busy)
    epochs = []
    t = 0.0
    state = s0
    # draw in batches until the path clears the horizon
    while t <= horizon:
        block = rng.exponential(1.0, size=256)
        for x in block:
            t += x / rates[0 if state == 1 else 1]
            epochs.append(t)
            state = 1 - state
            if t > horizon:
                break
    return s0, np.array(epochs)


def _flatten(eps: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    off = np.zeros(len(eps) + 1, np.int64)
    for i, e in enumerate(eps):
        off[i + 1] = off[i] + e.shape[0]
    flat = np.concatenate(eps) if eps else np.zeros(0)
    return flat, off


def simulate_multi(all_params: Sequence[UnslottedChannelParams],
                   periods: Sequence[PeriodPair], sensing: SensingModel,
                   sensing_time: float, horizon: float, seed: int,
                   *, n_bins: int = 200,
                   collect_timeline: bool = False) -> EmpiricalMetrics:
    """Measure the sensing-dependent-period protocol on all channels."""
    n = len(all_params)
    if n == 0:
        raise ValueError("need at least one channel")
    tf = np.array([p.t_free for p in periods])
    tb = np.array([p.t_busy for p in periods])
    if (tb <= 0.0).any():
        raise ValueError("multi-channel mode needs t_busy > 0 for every channel")
    max_period = float(max(tf.max(), tb.max()))
    if horizon < 100.0 * max_period:
        raise ValueError(
            f"horizon {horizon} too short; need >= 100 * max period {max_period}")

    root = np.random.SeedSequence(entropy=(int(seed), 0x0A17))
    ss = root.spawn(n + 1)
    s0 = np.zeros(n, np.int8)
    eps = []
    for i in range(n):
        st, e = _draw_epochs(all_params[i], horizon, np.random.default_rng(ss[i]))
        s0[i] = st
        eps.append(e)
    flat, off = _flatten(eps)
    cap = int(sum(math.ceil(horizon / min(tf[i], tb[i])) for i in range(n))) + 2 * n + 16
    u_sense = np.random.default_rng(ss[n]).random(cap)

    acc = np.zeros((n, 5))
    r_bins = np.zeros(n_bins)
    log_t = np.zeros(cap)
    log_ch = np.zeros(cap, np.int32)
    log_out = np.zeros(cap, np.int8)
    counters = np.zeros(4, np.int64)
    K.multi_channel_walk(flat, off, s0, tf, tb, sensing_time,
                         sensing.p_fa, sensing.p_md, u_sense, horizon,
                         acc, r_bins, log_t, log_ch, log_out, counters)
    k = int(counters[0])
    timeline = None
    if collect_timeline:
        timeline = EventTimeline(
            epochs=tuple(eps), initial_states=s0,
            actions_start=log_t[:k].copy(),
            actions_end=log_t[:k] + sensing_time,
            actions_channel=log_ch[:k].copy(),
            actions_kind=np.zeros(k, np.int8))
    return EmpiricalMetrics(
        secondary_utilization=acc[:, 0] / horizon,
        interference=acc[:, 1] / horizon,
        unexplored=acc[:, 2] / horizon,
        overhead=acc[:, 3] / horizon,
        useful=acc[:, 4] / horizon,
        throughput=float(acc[:, 4].sum() / horizon),
        throughput_bins=r_bins / (horizon / n_bins),
        handshake_failures=0,
        sync_failures=0,
        mean_search_delay=float("nan"),
        sense_events=k,
        timeline=timeline,
    )


def simulate_single(all_params: Sequence[UnslottedChannelParams],
                    access_periods: Sequence[float], sensing: SensingModel,
                    sensing_time: float, rts_cts_duration: float,
                    horizon: float, seed: int, *, n_bins: int = 200,
                    collect_timeline: bool = False) -> EmpiricalMetrics:
    """Measure the single-channel hopping protocol with the handshake.

    Both endpoints start from a shared table of the true channel states at
    time zero (the initial synchronization packet); afterwards the receiver
    learns sensing outcomes only through the handshake.
    """
    n = len(all_params)
    if n == 0:
        raise ValueError("need at least one channel")
    if sensing_time <= 0.0:
        raise ValueError("single-channel mode needs sensing_time > 0")
    if rts_cts_duration < 0.0:
        raise ValueError("rts_cts_duration must be >= 0")
    tfstar = np.array([float(x) for x in access_periods])
    if (tfstar <= 0.0).any():
        raise ValueError("access periods must be > 0")

    root = np.random.SeedSequence(entropy=(int(seed), 0x0A18))
    ss = root.spawn(n + 1)
    s0 = np.zeros(n, np.int8)
    eps = []
    for i in range(n):
        st, e = _draw_epochs(all_params[i], horizon * 1.01 + tfstar[i],
                             np.random.default_rng(ss[i]))
        s0[i] = st
        eps.append(e)
    flat, off = _flatten(eps)
    cap = int(math.ceil(horizon / sensing_time)) + 2 * n + 16
    u_sense = np.random.default_rng(ss[n]).random(cap)

    lam_sum = np.array([p.rate_sum for p in all_params])
    u = np.array([p.u for p in all_params])
    tx_state = s0.astype(np.uint8)
    tx_time = np.zeros(n)
    rx_state = s0.astype(np.uint8)
    rx_time = np.zeros(n)
    acc = np.zeros((n, 4))
    r_bins = np.zeros(n_bins)
    delays = np.zeros(cap)
    counters = np.zeros(8, np.int64)
    act_cap = 2 * cap
    act_t0 = np.zeros(act_cap)
    act_t1 = np.zeros(act_cap)
    act_ch = np.zeros(act_cap, np.int32)
    act_kind = np.zeros(act_cap, np.int8)

    K.single_channel_walk(flat, off, s0, lam_sum, u, tfstar, sensing_time,
                          rts_cts_duration, sensing.p_fa, sensing.p_md,
                          u_sense, horizon, tx_state, tx_time, rx_state,
                          rx_time, acc, r_bins, delays, counters,
                          act_t0, act_t1, act_ch, act_kind)

    free_tot = np.zeros(n)
    K.free_time_totals(flat, off, s0, horizon, free_tot)

    transmit_time = acc[:, 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        interference = np.where(transmit_time > 0.0,
                                acc[:, 1] / transmit_time, 0.0)
    n_delay = int(counters[6])
    timeline = None
    if collect_timeline:
        k = int(counters[4])
        timeline = EventTimeline(
            epochs=tuple(eps), initial_states=s0,
            actions_start=act_t0[:k].copy(), actions_end=act_t1[:k].copy(),
            actions_channel=act_ch[:k].copy(), actions_kind=act_kind[:k].copy())
    return EmpiricalMetrics(
        secondary_utilization=transmit_time / horizon,
        unexplored=(free_tot - acc[:, 3]) / horizon,
        interference=interference,
        overhead=acc[:, 2] / horizon,
        useful=acc[:, 3] / horizon,
        throughput=float(acc[:, 3].sum() / horizon),
        throughput_bins=r_bins / (horizon / n_bins),
        handshake_failures=int(counters[2]),
        sync_failures=int(counters[3]),
        mean_search_delay=float(delays[:n_delay].mean()) if n_delay else float("nan"),
        sense_events=int(counters[5]),
        timeline=timeline,
    )
