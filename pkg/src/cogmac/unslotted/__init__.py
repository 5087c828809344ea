from .analytics import (
    ChannelMetrics,
    PeriodPair,
    all_mean_intervals,
    channel_metrics,
    delta,
    delta_numeric,
    exponential_pdf,
    mean_sense_interval,
    network_throughput,
    steady_state_sense_free,
)
from .optimizer import (
    InterferenceConstraint,
    OptimizationResult,
    channel_priority_order,
    optimize_single_period,
    optimize_two_periods,
    single_channel_interference,
    solve_access_period,
)
from .sim import EmpiricalMetrics, EventTimeline, simulate_multi, simulate_single

__all__ = [
    "ChannelMetrics",
    "EmpiricalMetrics",
    "EventTimeline",
    "InterferenceConstraint",
    "OptimizationResult",
    "PeriodPair",
    "all_mean_intervals",
    "channel_metrics",
    "channel_priority_order",
    "delta",
    "delta_numeric",
    "exponential_pdf",
    "mean_sense_interval",
    "network_throughput",
    "optimize_single_period",
    "optimize_two_periods",
    "simulate_multi",
    "simulate_single",
    "single_channel_interference",
    "solve_access_period",
    "steady_state_sense_free",
]
