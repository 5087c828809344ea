"""Channel-selection policies for the slotted protocols.

All selection rules break ties toward the lowest channel index.  Both
endpoints of the secondary pair must apply the same rule, otherwise their
decisions diverge and synchronization breaks, so every function here is a
pure function of shared quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..model import SlottedChannelParams, steady_state_free_prob
from .whittle import WhittleConfig, whittle_index  # noqa: F401  (re-export)


@dataclass(frozen=True)
class PolicyDecision:
    """Access channel plus the set of channels sensed this slot."""

    access_channel: int
    sense_set: tuple[int, ...]

    def __post_init__(self):
        if self.access_channel not in self.sense_set:
            raise ValueError("access channel must be in the sense set")


@dataclass(frozen=True)
class UcbState:
    """Success / attempt tallies driving the confidence-bound index.

    Protocol runs additionally keep attempts <= slot per channel; the
    constructor only enforces the per-channel ordering so the index formula
    can be evaluated on free-standing tallies.
    """

    successes: np.ndarray
    attempts: np.ndarray
    slot: int

    def __post_init__(self):
        x = np.asarray(self.successes, dtype=np.int64)
        y = np.asarray(self.attempts, dtype=np.int64)
        object.__setattr__(self, "successes", x)
        object.__setattr__(self, "attempts", y)
        if x.shape != y.shape:
            raise ValueError("successes/attempts shape mismatch")
        if (x < 0).any() or (y < x).any():
            raise ValueError("need 0 <= successes <= attempts")
        if self.slot < 0:
            raise ValueError("slot must be >= 0")


def _argmax_lowest(values: np.ndarray) -> int:
    # np.argmax already returns the first (lowest-index) maximizer
    return int(np.argmax(values))


def greedy_access(shared_belief: Sequence[float], bandwidths: Sequence[float]) -> int:
    """Channel maximizing believed-free probability times bandwidth."""
    belief = np.asarray(shared_belief, dtype=float)
    bw = np.asarray(bandwidths, dtype=float)
    if belief.size == 0 or belief.shape != bw.shape:
        raise ValueError("need matching non-empty belief and bandwidth vectors")
    return _argmax_lowest(belief * bw)


def select_sense_set(whittle: Sequence[float], shared_belief: Sequence[float],
                     bandwidths: Sequence[float], L: int) -> PolicyDecision:
    """Access the top index-bandwidth channel, explore the top learning gains.

    The sense set is the access channel plus the L-1 channels with the
    largest index-minus-belief gap (the expected observation value).
    """
    w = np.asarray(whittle, dtype=float)
    belief = np.asarray(shared_belief, dtype=float)
    bw = np.asarray(bandwidths, dtype=float)
    n = w.shape[0]
    if not 1 <= L <= n:
        raise ValueError(f"need 1 <= L <= {n}, got L={L}")
    access = _argmax_lowest(w * bw)
    gain = w - belief
    order = sorted((i for i in range(n) if i != access),
                   key=lambda i: (-gain[i], i))
    sense = sorted([access] + order[:L - 1])
    return PolicyDecision(access_channel=access, sense_set=tuple(sense))


def whittle_slot_reward(decision: PolicyDecision, whittle: Sequence[float],
                        shared_belief: Sequence[float]) -> float:
    """Per-slot reward: access index plus the exploration gains of the rest."""
    w = np.asarray(whittle, dtype=float)
    belief = np.asarray(shared_belief, dtype=float)
    total = w[decision.access_channel]
    for i in decision.sense_set:
        if i != decision.access_channel:
            total += w[i] - belief[i]
    return float(total)


def ucb_index(state: UcbState, channel: int) -> float:
    """Empirical success rate plus the confidence-bound exploration bonus."""
    y = int(state.attempts[channel])
    if y < 1:
        raise ZeroDivisionError(
            f"channel {channel} has no attempts; seed each channel once first")
    if state.slot < 1:
        raise ValueError("slot index must be >= 1")
    x = int(state.successes[channel])
    return x / y + math.sqrt(2.0 * math.log(state.slot) / y)


def learning_schedule(N: int, L: int, LP: int) -> list[tuple[tuple[int, int], tuple[int, ...]]]:
    """Contiguous sensing phases covering all channels in groups of size L.

    Returns ((start_slot, end_slot), channels) per phase; ceil(N/L) phases
    of LP slots each, every channel in exactly one group.
    """
    if not 1 <= L <= N:
        raise ValueError(f"need 1 <= L <= N, got L={L}, N={N}")
    if LP < 0:
        raise ValueError(f"LP must be >= 0, got {LP}")
    phases = []
    n_groups = math.ceil(N / L)
    for g in range(n_groups):
        channels = tuple(range(g * L, min((g + 1) * L, N)))
        phases.append(((g * LP, (g + 1) * LP), channels))
    return phases


def fixed_sequence_baseline(channels: Sequence[SlottedChannelParams]) -> int:
    """Static channel choice: best stationary free probability times bandwidth."""
    if len(channels) == 0:
        raise ValueError("need at least one channel")
    scores = np.array([steady_state_free_prob(ch) * ch.bandwidth
                       for ch in channels])
    return _argmax_lowest(scores)
