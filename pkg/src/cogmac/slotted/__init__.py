from .beliefs import (
    BeliefState,
    SensingOutcome,
    TransitionCounts,
    estimate_transitions,
    genie_throughput_bound,
    iid_free_estimate,
    posterior_density,
    propagate_belief,
    record_transition,
    sensing_posterior,
    update_beliefs,
)
from .policies import (
    PolicyDecision,
    UcbState,
    fixed_sequence_baseline,
    greedy_access,
    learning_schedule,
    select_sense_set,
    ucb_index,
    whittle_slot_reward,
)
from .sim import (
    POLICIES,
    MonteCarloResult,
    RunResult,
    SlottedConfig,
    monte_carlo,
    run_seed,
    simulate_slotted,
)
from .whittle import WhittleConfig, build_index_table, index_from_table, whittle_index

__all__ = [
    "BeliefState",
    "MonteCarloResult",
    "POLICIES",
    "PolicyDecision",
    "RunResult",
    "SensingOutcome",
    "SlottedConfig",
    "TransitionCounts",
    "UcbState",
    "WhittleConfig",
    "build_index_table",
    "estimate_transitions",
    "fixed_sequence_baseline",
    "genie_throughput_bound",
    "greedy_access",
    "iid_free_estimate",
    "index_from_table",
    "learning_schedule",
    "monte_carlo",
    "posterior_density",
    "propagate_belief",
    "record_transition",
    "run_seed",
    "select_sense_set",
    "sensing_posterior",
    "simulate_slotted",
    "ucb_index",
    "update_beliefs",
    "whittle_index",
    "whittle_slot_reward",
]
