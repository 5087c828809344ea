"""Belief propagation, sensing posteriors and transition-probability learning.

The transmitter keeps two belief vectors: its own, built from everything it
has sensed, and the shared one that the receiver can reconstruct from
delivered packets alone.  Both endpoints must update the shared vector with
identical arithmetic or the pair loses channel synchronization, so the
update rules here are written as pure functions of (state, outcome, ack).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ImpossibleEvidenceError
from ..model import BUSY, FREE, SensingModel, SlottedChannelParams, steady_state_free_prob

NOT_SENSED = -1
SENSED_BUSY = 0
SENSED_FREE = 1

SENSED_FREE_EV = "sensed_free"
SENSED_BUSY_EV = "sensed_busy"
NO_ACK_EV = "no_ack"


@dataclass(frozen=True)
class TransitionCounts:
    """Tallies of sensed-state transitions for one channel."""

    n00: int = 0
    n01: int = 0
    n10: int = 0
    n11: int = 0
    n1: int = 0
    slots_observed: int = 0

    def __post_init__(self):
        for name in ("n00", "n01", "n10", "n11", "n1", "slots_observed"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        total = self.n00 + self.n01 + self.n10 + self.n11
        if self.slots_observed and total > self.slots_observed - 1:
            raise ValueError("transition count exceeds observed slot pairs")


@dataclass(frozen=True)
class SensingOutcome:
    """Sensing vector restricted to the sensed set (-1 marks unsensed)."""

    sensed: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.sensed, dtype=np.int8)
        object.__setattr__(self, "sensed", arr)
        if not np.isin(arr, (NOT_SENSED, SENSED_BUSY, SENSED_FREE)).all():
            raise ValueError("sensed entries must be -1, 0 or 1")

    @property
    def sensed_set(self) -> np.ndarray:
        return np.flatnonzero(self.sensed != NOT_SENSED)


@dataclass(frozen=True)
class BeliefState:
    """Transmitter and shared beliefs plus the last shared estimates.

    ``shared_estimates`` has one (p01, p11) row per channel.  ``last_ack``
    records whether the previous slot's transmission was acknowledged; the
    two belief vectors coincide exactly when it is True.
    """

    tx_belief: np.ndarray
    shared_belief: np.ndarray
    shared_estimates: np.ndarray
    last_ack: bool = True

    def __post_init__(self):
        tx = np.asarray(self.tx_belief, dtype=float)
        sh = np.asarray(self.shared_belief, dtype=float)
        est = np.asarray(self.shared_estimates, dtype=float)
        object.__setattr__(self, "tx_belief", tx)
        object.__setattr__(self, "shared_belief", sh)
        object.__setattr__(self, "shared_estimates", est)
        if tx.shape != sh.shape or est.shape != (tx.shape[0], 2):
            raise ValueError("belief vector / estimate shape mismatch")
        for v in (tx, sh):
            if ((v < 0) | (v > 1)).any():
                raise ValueError("belief entries must lie in [0, 1]")


def propagate_belief(omega: float, p11: float, p01: float) -> float:
    """One-slot belief update for an unobserved channel."""
    return omega * p11 + (1.0 - omega) * p01


def sensing_posterior(omega: float, evidence: str, sensing: SensingModel) -> float:
    """Posterior probability the channel is free given one slot's evidence.

    Evidence is one of 'sensed_free', 'sensed_busy' (non-access channels) or
    'no_ack' (the access channel after a missing acknowledgment, which
    confounds a busy sensing outcome with a collision).  Raises
    ImpossibleEvidenceError when the evidence has zero prior probability.
    """
    if not 0.0 <= omega <= 1.0:
        raise ValueError(f"omega must be in [0, 1], got {omega}")
    p_fa, p_md = sensing.p_fa, sensing.p_md
    if evidence == SENSED_FREE_EV:
        num = (1.0 - p_fa) * omega
        den = num + p_md * (1.0 - omega)
    elif evidence == SENSED_BUSY_EV:
        num = p_fa * omega
        den = num + (1.0 - p_md) * (1.0 - omega)
    elif evidence == NO_ACK_EV:
        num = p_fa * omega
        den = num + (1.0 - omega)
    else:
        raise ValueError(f"unknown evidence kind {evidence!r}")
    if den <= 0.0:
        raise ImpossibleEvidenceError(
            f"evidence {evidence!r} has zero probability at omega={omega}")
    return num / den


def record_transition(counts: TransitionCounts, prev: str, cur: str) -> TransitionCounts:
    """Tally one sensed transition between consecutive observations."""
    if prev == BUSY and cur == BUSY:
        return replace(counts, n00=counts.n00 + 1)
    if prev == BUSY and cur == FREE:
        return replace(counts, n01=counts.n01 + 1)
    if prev == FREE and cur == BUSY:
        return replace(counts, n10=counts.n10 + 1)
    if prev == FREE and cur == FREE:
        return replace(counts, n11=counts.n11 + 1)
    raise ValueError(f"states must be 'free' or 'busy', got {prev!r}, {cur!r}")


def estimate_transitions(counts: TransitionCounts) -> tuple[float, float]:
    """Posterior-mean estimates of (p01, p11) under uniform priors."""
    p01 = (counts.n01 + 1) / (counts.n00 + counts.n01 + 2)
    p11 = (counts.n11 + 1) / (counts.n11 + counts.n10 + 2)
    return p01, p11


def posterior_density(counts: TransitionCounts, which: str, x: float) -> float:
    """Posterior density of one transition probability at ``x``.

    The uniform prior combined with the transition tallies yields a Beta
    density whose mean matches :func:`estimate_transitions`.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if which == "p01":
        a, b = counts.n01 + 1, counts.n00 + 1
    elif which == "p11":
        a, b = counts.n11 + 1, counts.n10 + 1
    else:
        raise ValueError(f"which must be 'p01' or 'p11', got {which!r}")
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    if x == 0.0:
        return math.exp(log_norm) if a == 1 else 0.0
    if x == 1.0:
        return math.exp(log_norm) if b == 1 else 0.0
    return math.exp(log_norm + (a - 1) * math.log(x) + (b - 1) * math.log1p(-x))


def iid_free_estimate(counts: TransitionCounts) -> float:
    """Empirical free probability for memoryless channels."""
    if counts.slots_observed < 1:
        raise ValueError("need at least one observed slot")
    return counts.n1 / counts.slots_observed


def update_beliefs(state: BeliefState, access_channel: int,
                   outcome: SensingOutcome, ack: bool,
                   estimates: np.ndarray, sensing: SensingModel) -> BeliefState:
    """Advance both belief vectors by one slot.

    On an acknowledged slot the fresh ``estimates`` become the shared ones
    and (after a failure streak) the shared vector is first resynchronized
    to the transmitter's.  On a failed slot the shared vector sees only the
    missing acknowledgment while the transmitter additionally folds in its
    sensing outcomes with its fresh estimates.
    """
    sensed = outcome.sensed
    n = state.shared_belief.shape[0]
    if sensed.shape[0] != n:
        raise ValueError("outcome length does not match belief state")
    if sensed[access_channel] == NOT_SENSED:
        raise ValueError(f"access channel {access_channel} was not sensed")
    est = np.asarray(estimates, dtype=float)
    if est.shape != (n, 2):
        raise ValueError("estimates must have shape (N, 2)")

    if ack:
        base = state.shared_belief if state.last_ack else state.tx_belief
        p01b, p11b = est[:, 0], est[:, 1]
        new_shared = np.empty(n)
        for i in range(n):
            if i == access_channel:
                new_shared[i] = p11b[i]
            elif sensed[i] == SENSED_FREE:
                post = sensing_posterior(base[i], SENSED_FREE_EV, sensing)
                new_shared[i] = post * p11b[i] + (1.0 - post) * p01b[i]
            elif sensed[i] == SENSED_BUSY:
                post = sensing_posterior(base[i], SENSED_BUSY_EV, sensing)
                new_shared[i] = post * p11b[i] + (1.0 - post) * p01b[i]
            else:
                new_shared[i] = propagate_belief(base[i], p11b[i], p01b[i])
        return BeliefState(tx_belief=new_shared.copy(), shared_belief=new_shared,
                           shared_estimates=est.copy(), last_ack=True)

    p01s, p11s = state.shared_estimates[:, 0], state.shared_estimates[:, 1]
    new_shared = np.empty(n)
    for i in range(n):
        if i == access_channel:
            post = sensing_posterior(state.shared_belief[i], NO_ACK_EV, sensing)
            new_shared[i] = post * p11s[i] + (1.0 - post) * p01s[i]
        else:
            new_shared[i] = propagate_belief(state.shared_belief[i], p11s[i], p01s[i])

    new_tx = np.empty(n)
    for i in range(n):
        if i == access_channel:
            post = sensing_posterior(state.tx_belief[i], NO_ACK_EV, sensing)
            new_tx[i] = post * est[i, 1] + (1.0 - post) * est[i, 0]
        elif sensed[i] == SENSED_FREE:
            post = sensing_posterior(state.tx_belief[i], SENSED_FREE_EV, sensing)
            new_tx[i] = post * est[i, 1] + (1.0 - post) * est[i, 0]
        elif sensed[i] == SENSED_BUSY:
            post = sensing_posterior(state.tx_belief[i], SENSED_BUSY_EV, sensing)
            new_tx[i] = post * est[i, 1] + (1.0 - post) * est[i, 0]
        else:
            new_tx[i] = propagate_belief(state.tx_belief[i], est[i, 1], est[i, 0])
    return BeliefState(tx_belief=new_tx, shared_belief=new_shared,
                       shared_estimates=state.shared_estimates.copy(),
                       last_ack=False)


def genie_throughput_bound(channels: list[SlottedChannelParams]) -> float:
    """Expected per-slot throughput given delayed knowledge of all states.

    Enumerates the joint stationary distribution of the channels and, for
    each joint state, credits the best expected transition-weighted
    bandwidth.  Exact but exponential in N, hence the N <= 20 cap.
    """
    n = len(channels)
    if n < 1:
        raise ValueError("need at least one channel")
    if n > 20:
        raise ValueError(f"exact enumeration supports N <= 20, got {n}")
    probs = np.array([1.0])
    best = np.array([0.0])
    for ch in channels:
        pi = steady_state_free_prob(ch)
        trans = np.array([ch.p01 * ch.bandwidth, ch.p11 * ch.bandwidth])
        state_probs = np.array([1.0 - pi, pi])
        probs = np.repeat(probs, 2) * np.tile(state_probs, probs.shape[0])
        best = np.maximum(np.repeat(best, 2), np.tile(trans, best.shape[0]))
    return float(np.dot(probs, best))
