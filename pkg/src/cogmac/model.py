"""Channel and sensing-detector primitives shared by both protocol families.

Slotted channels are two-state (free/busy) Markov chains described by the
transition probabilities into the free state.  Un-slotted channels alternate
exponentially distributed busy and free sojourns.  The energy-detector model
is captured by its error probabilities and the minimum sensing time needed
to achieve them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erfcinv

from .errors import DegenerateChainError

FREE = "free"
BUSY = "busy"


def q_inv(p: float) -> float:
    """Inverse of the standard normal tail function Q(x) = P(Z > x)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"Q^-1 requires a probability in (0, 1), got {p}")
    return math.sqrt(2.0) * float(erfcinv(2.0 * p))


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class SlottedChannelParams:
    """Per-channel Markov transition probabilities and bandwidth.

    p01 is the busy-to-free transition probability, p11 the free-to-free
    one; the complements follow.  ``bandwidth`` is the throughput credited
    for one successful slot on this channel.
    """

    p01: float
    p11: float
    bandwidth: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p01 <= 1.0:
            raise ValueError(f"p01 must be in [0, 1], got {self.p01}")
        if not 0.0 <= self.p11 <= 1.0:
            raise ValueError(f"p11 must be in [0, 1], got {self.p11}")
        if self.bandwidth < 0.0:
            raise ValueError(f"bandwidth must be >= 0, got {self.bandwidth}")

    @property
    def p00(self) -> float:
        return 1.0 - self.p01

    @property
    def p10(self) -> float:
        return 1.0 - self.p11


@dataclass(frozen=True)
class UnslottedChannelParams:
    """Exponential sojourn rates of an alternating busy/free channel.

    ``lambda_free`` is the rate of the free-period distribution (so the mean
    free sojourn is 1/lambda_free) and ``lambda_busy`` the rate of the busy
    one.  Utilization, the long-run busy fraction, follows from the two.
    """

    lambda_free: float
    lambda_busy: float

    def __post_init__(self):
        if self.lambda_free <= 0.0:
            raise ValueError(f"lambda_free must be > 0, got {self.lambda_free}")
        if self.lambda_busy <= 0.0:
            raise ValueError(f"lambda_busy must be > 0, got {self.lambda_busy}")

    @property
    def rate_sum(self) -> float:
        return self.lambda_free + self.lambda_busy

    @property
    def u(self) -> float:
        return self.lambda_free / self.rate_sum

    @property
    def mean_free(self) -> float:
        return 1.0 / self.lambda_free

    @property
    def mean_busy(self) -> float:
        return 1.0 / self.lambda_busy


@dataclass(frozen=True)
class SensingModel:
    """Detector error probabilities plus the sensing duration they require.

    ``snr`` is a linear power ratio.  Configurations may specify it in dB
    instead (see :meth:`from_detector`); the stored value is always linear.
    """

    p_fa: float
    p_md: float
    sensing_time: float = 0.0
    sampling_freq: float | None = None
    snr: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_fa < 1.0:
            raise ValueError(f"p_fa must be in [0, 1), got {self.p_fa}")
        if not 0.0 <= self.p_md < 1.0:
            raise ValueError(f"p_md must be in [0, 1), got {self.p_md}")
        if self.sensing_time < 0.0:
            raise ValueError(f"sensing_time must be >= 0, got {self.sensing_time}")

    @classmethod
    def from_detector(cls, p_fa: float, p_md: float, sampling_freq: float,
                      snr: float | None = None, snr_db: float | None = None) -> "SensingModel":
        """Build a model whose sensing time comes from the detector equation."""
        if (snr is None) == (snr_db is None):
            raise ValueError("specify exactly one of snr (linear) or snr_db")
        snr_lin = db_to_linear(snr_db) if snr_db is not None else float(snr)
        t_s = compute_sensing_time(p_fa, p_md, snr_lin, sampling_freq)
        return cls(p_fa=p_fa, p_md=p_md, sensing_time=t_s,
                   sampling_freq=sampling_freq, snr=snr_lin)

    @classmethod
    def perfect(cls, sensing_time: float = 0.0) -> "SensingModel":
        return cls(p_fa=0.0, p_md=0.0, sensing_time=sensing_time)

    @property
    def is_perfect(self) -> bool:
        return self.p_fa == 0.0 and self.p_md == 0.0


def compute_sensing_time(p_fa: float, p_md: float, snr: float,
                         sampling_freq: float) -> float:
    """Minimum energy-detection time meeting the target error probabilities.

    ``snr`` is the primary-user signal-to-noise ratio as a linear ratio.
    Raises for error probabilities of exactly 0 or 1 where the inverse
    Gaussian tail diverges.
    """
    if snr <= 0.0:
        raise ValueError(f"snr must be > 0, got {snr}")
    if sampling_freq <= 0.0:
        raise ValueError(f"sampling_freq must be > 0, got {sampling_freq}")
    bracket = q_inv(p_fa) - q_inv(1.0 - p_md) * math.sqrt(1.0 + 2.0 * snr)
    return (2.0 / sampling_freq) * bracket * bracket / (snr * snr)


def utilization(params: UnslottedChannelParams) -> float:
    """Long-run fraction of time the channel is busy."""
    return params.u


def transition_prob(params: UnslottedChannelParams, from_state: str,
                    elapsed: float) -> float:
    """Probability the channel is free ``elapsed`` after being seen in ``from_state``."""
    if elapsed < 0.0:
        raise ValueError(f"elapsed must be >= 0, got {elapsed}")
    u = params.u
    x = params.rate_sum * elapsed
    if from_state == FREE:
        return (1.0 - u) + u * math.exp(-x)
    if from_state == BUSY:
        return -(1.0 - u) * math.expm1(-x)
    raise ValueError(f"from_state must be 'free' or 'busy', got {from_state!r}")


def steady_state_free_prob(params: SlottedChannelParams) -> float:
    """Stationary probability of the free state of the slotted chain."""
    denom = params.p01 + (1.0 - params.p11)
    if denom <= 0.0:
        raise DegenerateChainError(
            f"chain with p01={params.p01}, p11={params.p11} has no unique "
            "stationary distribution")
    return params.p01 / denom
