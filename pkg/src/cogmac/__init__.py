"""Cognitive MAC protocols for slotted and un-slotted primary networks.

Two protocol families share the channel and detector primitives in
:mod:`cogmac.model`:

* :mod:`cogmac.slotted` - synchronized belief tracking over Gilbert-Elliott
  channels, full-sensing / Whittle-index / confidence-bound policies, and a
  slot-level Monte Carlo simulator.
* :mod:`cogmac.unslotted` - renewal-theoretic time-fraction analytics,
  sensing-period optimization under interference constraints, and
  continuous-time event simulators for the multi-channel and hopping modes.

``cogmac.cli`` dispatches experiment configs to either family.
"""

from .config import ExperimentConfig, parse_config, serialize_config
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateChainError,
    ImpossibleEvidenceError,
    InfeasibleError,
    NoFiniteRootError,
)
from .model import (
    BUSY,
    FREE,
    SensingModel,
    SlottedChannelParams,
    UnslottedChannelParams,
    compute_sensing_time,
    steady_state_free_prob,
    transition_prob,
    utilization,
)

__all__ = [
    "BUSY",
    "ConfigError",
    "ConvergenceError",
    "DegenerateChainError",
    "ExperimentConfig",
    "FREE",
    "ImpossibleEvidenceError",
    "InfeasibleError",
    "NoFiniteRootError",
    "SensingModel",
    "SlottedChannelParams",
    "UnslottedChannelParams",
    "compute_sensing_time",
    "parse_config",
    "serialize_config",
    "steady_state_free_prob",
    "transition_prob",
    "utilization",
]

__version__ = "0.1.0"
