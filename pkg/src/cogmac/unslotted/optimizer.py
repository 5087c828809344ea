"""Sensing-period optimization under primary interference constraints.

The two-period optimizer maximizes the network throughput over one
(free-period, busy-period) pair per channel.  Channels couple only through
the aggregate sensing-overhead factor, so the search runs block-coordinate
sweeps: each channel solves a 2-D subproblem (log-spaced grid seeding
followed by a multiplicative pattern search, with candidates filtered by
the interference constraint and polished onto the constraint boundary).
The single-period baseline restricts the same machinery to the diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InfeasibleError, NoFiniteRootError
from ..model import BUSY, FREE, SensingModel, UnslottedChannelParams, transition_prob
from .analytics import PeriodPair, delta

FEASIBILITY_TOL = 1e-6


@dataclass(frozen=True)
class InterferenceConstraint:
    """Per-channel ceilings on the interference time fraction."""

    per_channel_max: tuple[float, ...]

    def __post_init__(self):
        for v in self.per_channel_max:
            if v <= 0.0:
                raise ValueError(f"interference limits must be > 0, got {v}")

    @classmethod
    def fraction_of_utilization(cls, all_params: Sequence[UnslottedChannelParams],
                                fraction: float) -> "InterferenceConstraint":
        return cls(tuple(fraction * p.u for p in all_params))


@dataclass(frozen=True)
class OptimizationResult:
    periods: tuple[PeriodPair, ...]
    objective: float
    constraint_slack: tuple[float, ...]
    iterations: int
    converged: bool


def single_channel_interference(params: UnslottedChannelParams, t_free: float,
                                sensing: SensingModel) -> float:
    """Interference fraction of one access period of length ``t_free``."""
    if t_free <= 0.0:
        raise ValueError(f"t_free must be > 0, got {t_free}")
    d1 = delta(params, FREE, t_free)
    d0 = delta(params, BUSY, t_free)
    return ((1.0 - sensing.p_fa) * (t_free - d1) / t_free
            + sensing.p_md * (t_free - d0) / t_free)


def solve_access_period(params: UnslottedChannelParams, sensing: SensingModel,
                        t_imax: float, *, t_max: float | None = None) -> float:
    """Access period whose interference fraction equals ``t_imax``.

    Bracketing bisection on the monotone interference curve; raises
    NoFiniteRootError when the target is at or above the limiting
    interference (``u`` under perfect sensing).
    """
    if t_imax <= 0.0:
        raise ValueError(f"t_imax must be > 0, got {t_imax}")
    if t_max is None:
        t_max = 1e7 / params.rate_sum
    lo = 1e-12 / params.rate_sum
    f_lo = single_channel_interference(params, lo, sensing)
    if f_lo > t_imax:
        raise NoFiniteRootError(
            f"interference already {f_lo} at vanishing period; target {t_imax} "
            "unreachable (miss-detection floor)")
    hi = 1.0 / params.rate_sum
    while single_channel_interference(params, hi, sensing) < t_imax:
        hi *= 2.0
        if hi > t_max:
            raise NoFiniteRootError(
                f"no finite access period reaches interference {t_imax}; "
                f"limit is {single_channel_interference(params, t_max, sensing)}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = single_channel_interference(params, mid, sensing)
        if abs(f_mid - t_imax) < 1e-9:
            return mid
        if f_mid < t_imax:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if abs(single_channel_interference(params, mid, sensing) - t_imax) > 1e-9:
        raise NoFiniteRootError(f"bisection stalled solving T^I = {t_imax}")
    return mid


def channel_priority_order(last_states: Sequence[str],
                           last_sense_times: Sequence[float], now: float,
                           all_params: Sequence[UnslottedChannelParams],
                           sensing_time: float) -> list[int]:
    """Channel indices in descending order of the revisit index.

    The index is the probability of finding the channel free given its last
    sensed state and the elapsed time, per unit sensing cost.  Ties break
    toward the lower channel index.
    """
    if sensing_time <= 0.0:
        raise ValueError(f"sensing_time must be > 0, got {sensing_time}")
    gammas = []
    for state, t_s, params in zip(last_states, last_sense_times, all_params,
                                  strict=True):
        if now < t_s:
            raise ValueError(f"now={now} precedes last sense time {t_s}")
        gammas.append(transition_prob(params, state, now - t_s) / sensing_time)
    return sorted(range(len(gammas)), key=lambda i: (-gammas[i], i))


class _NetworkEvaluator:
    """Throughput evaluation with per-channel terms cached for sweeps.

    Keeps, for each channel, the non-interfering utilization g = T^SU - T^I
    and the sensing rate 1/mu; the network objective is
    sum(g) * (1 - T_s * sum(1/mu)) in aggregate-overhead mode.
    """

    def __init__(self, all_params, sensing, sensing_time, overhead_mode):
        self.params = list(all_params)
        self.sensing = sensing
        self.ts = sensing_time
        self.mode = overhead_mode
        self.n = len(self.params)

    def channel_terms(self, i: int, tf: float, tb: float):
        """Return (g, inv_mu, t_i) for channel i at the given periods."""
        params = self.params[i]
        p_fa, p_md = self.sensing.p_fa, self.sensing.p_md
        lam = params.rate_sum
        u = params.u
        em1_f = math.expm1(-lam * tf)
        em1_b = math.expm1(-lam * tb)
        p11_f = (1.0 - u) + u * (1.0 + em1_f)
        p01_b = -(1.0 - u) * em1_b
        denom = 1.0 - p11_f + p01_b
        p_ss = p01_b / denom
        mu = (p_ss * ((1.0 - p_fa) * tf + p_fa * tb)
              + (1.0 - p_ss) * (p_md * tf + (1.0 - p_md) * tb))
        ramp_f = tf + em1_f / lam
        d1_tf = tf - u * ramp_f
        d0_tf = (1.0 - u) * ramp_f
        t_su = ((1.0 - p_fa) * p_ss + p_md * (1.0 - p_ss)) * tf / mu
        t_i = ((1.0 - p_fa) * p_ss * (tf - d1_tf) / mu
               + p_md * (1.0 - p_ss) * (tf - d0_tf) / mu)
        return t_su - t_i, 1.0 / mu, t_i

    def objective(self, gs, inv_mus):
        if self.mode == "aggregate":
            rate = self.ts * sum(inv_mus)
            return sum(g * (1.0 - rate) for g in gs)
        return sum(g * (1.0 - self.n * self.ts * inv)
                   for g, inv in zip(gs, inv_mus))

    def block_objective(self, i, tf, tb, gs, inv_mus):
        """Network objective with channel i moved to (tf, tb)."""
        g_i, inv_i, t_i = self.channel_terms(i, tf, tb)
        if self.mode == "aggregate":
            rate = self.ts * (sum(inv_mus) - inv_mus[i] + inv_i)
            total = (sum(gs) - gs[i] + g_i) * (1.0 - rate)
        else:
            total = self.objective(
                [g if j != i else g_i for j, g in enumerate(gs)],
                [v if j != i else inv_i for j, v in enumerate(inv_mus)])
        return total, g_i, inv_i, t_i


def _max_feasible_tf(ev: _NetworkEvaluator, i: int, tb: float, imax: float,
                     lo: float, hi: float) -> float | None:
    """Largest t_free in [lo, hi] keeping channel i's interference <= imax."""
    if ev.channel_terms(i, lo, tb)[2] > imax:
        return None
    if ev.channel_terms(i, hi, tb)[2] <= imax:
        return hi
    a, b = lo, hi
    for _ in range(100):
        mid = 0.5 * (a + b)
        if ev.channel_terms(i, mid, tb)[2] <= imax:
            a = mid
        else:
            b = mid
    return a


def _solve_block(ev, i, imax, gs, inv_mus, lo, hi, grid_pts):
    """2-D subproblem for channel i: grid seed, pattern search, boundary polish."""
    tf_grid = np.geomspace(lo, hi, grid_pts)
    tb_grid = np.geomspace(lo, hi, grid_pts)
    best = (-math.inf, None)

    def consider(tf, tb):
        nonlocal best
        total, _, _, t_i = ev.block_objective(i, tf, tb, gs, inv_mus)
        if t_i <= imax and total > best[0]:
            best = (total, (tf, tb))

    for tb in tb_grid:
        tf_cap = _max_feasible_tf(ev, i, tb, imax, lo, hi)
        if tf_cap is None:
            continue
        consider(tf_cap, tb)  # constraint-boundary seed
        for tf in tf_grid:
            if tf <= tf_cap:
                consider(tf, tb)
    if best[1] is None:
        raise InfeasibleError(
            f"channel {i}: no period pair satisfies interference <= {imax}")

    # multiplicative pattern search around the incumbent
    tf, tb = best[1]
    step = 0.25
    while step > 1e-7:
        moved = False
        for dtf, dtb in ((1 + step, 1.0), (1 / (1 + step), 1.0),
                         (1.0, 1 + step), (1.0, 1 / (1 + step)),
                         (1 + step, 1 + step), (1 / (1 + step), 1 / (1 + step))):
            cand_tf = min(max(tf * dtf, lo), hi)
            cand_tb = min(max(tb * dtb, lo), hi)
            total, _, _, t_i = ev.block_objective(i, cand_tf, cand_tb, gs, inv_mus)
            if t_i <= imax and total > best[0] + 1e-14:
                best = (total, (cand_tf, cand_tb))
                tf, tb = cand_tf, cand_tb
                moved = True
        if not moved:
            step *= 0.5

    # polish onto the constraint boundary for the incumbent busy period
    tf_cap = _max_feasible_tf(ev, i, tb, imax, lo, hi)
    if tf_cap is not None:
        total, _, _, t_i = ev.block_objective(i, tf_cap, tb, gs, inv_mus)
        if t_i <= imax and total > best[0]:
            best = (total, (tf_cap, tb))
    return best


def _optimize(all_params, sensing, sensing_time, constraint, *, diagonal,
              overhead_mode, n_starts, seed, bounds, max_sweeps, sweep_tol):
    n = len(all_params)
    if len(constraint.per_channel_max) != n:
        raise ValueError("constraint length does not match channel count")
    for params, imax in zip(all_params, constraint.per_channel_max):
        limit = params.u * (1.0 - sensing.p_fa + sensing.p_md)
        if imax >= limit:
            raise InfeasibleError(
                f"interference limit {imax} is not binding below the "
                f"limiting interference {limit}; no finite optimum exists")

    ev = _NetworkEvaluator(all_params, sensing, sensing_time, overhead_mode)
    if bounds is None:
        lo = max(sensing_time, 1e-4 / max(p.rate_sum for p in all_params))
        hi = 1e4 * max(1.0 / p.lambda_free for p in all_params)
    else:
        lo, hi = bounds
    if lo <= 0.0:
        lo = 1e-6 * hi

    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x0b71)))
    best_overall = None
    total_sweeps = 0
    converged_any = False

    for start in range(n_starts):
        if start == 0:
            periods = [(min(max(1.0 / p.rate_sum, lo), hi),) * 2 for p in all_params]
        else:
            logs = rng.uniform(math.log(lo), math.log(hi), size=(n, 2))
            periods = [(math.exp(a), math.exp(b)) for a, b in logs]
        terms = [ev.channel_terms(i, tf, tb) for i, (tf, tb) in enumerate(periods)]
        gs = [t[0] for t in terms]
        inv_mus = [t[1] for t in terms]
        prev_obj = -math.inf
        converged = False
        for sweep in range(max_sweeps):
            total_sweeps += 1
            for i in range(n):
                if diagonal:
                    obj, (tf, tb) = _solve_block_diag(
                        ev, i, constraint.per_channel_max[i], gs, inv_mus, lo, hi)
                else:
                    obj, (tf, tb) = _solve_block(
                        ev, i, constraint.per_channel_max[i], gs, inv_mus,
                        lo, hi, 24)
                periods[i] = (tf, tb)
                g_i, inv_i, _ = ev.channel_terms(i, tf, tb)
                gs[i] = g_i
                inv_mus[i] = inv_i
            obj = ev.objective(gs, inv_mus)
            if obj - prev_obj < sweep_tol:
                converged = True
                break
            prev_obj = obj
        converged_any = converged_any or converged
        obj = ev.objective(gs, inv_mus)
        if best_overall is None or obj > best_overall[0]:
            slack = tuple(constraint.per_channel_max[i]
                          - ev.channel_terms(i, *periods[i])[2]
                          for i in range(n))
            best_overall = (obj, tuple(PeriodPair(tf, tb) for tf, tb in periods),
                            slack)

    obj, period_pairs, slack = best_overall
    if min(slack) < -FEASIBILITY_TOL:
        raise InfeasibleError(f"optimizer returned an infeasible point: slack {slack}")
    return OptimizationResult(periods=period_pairs, objective=obj,
                              constraint_slack=slack, iterations=total_sweeps,
                              converged=converged_any)


def _solve_block_diag(ev, i, imax, gs, inv_mus, lo, hi):
    """1-D subproblem on the diagonal t_free == t_busy."""
    best = (-math.inf, None)

    def consider(tp):
        nonlocal best
        total, _, _, t_i = ev.block_objective(i, tp, tp, gs, inv_mus)
        if t_i <= imax and total > best[0]:
            best = (total, (tp, tp))

    cap = _max_feasible_tf_diag(ev, i, imax, lo, hi)
    if cap is None:
        raise InfeasibleError(
            f"channel {i}: no single period satisfies interference <= {imax}")
    consider(cap)
    for tp in np.geomspace(lo, cap, 96):
        consider(tp)
    tp = best[1][0]
    step = 0.25
    while step > 1e-8:
        moved = False
        for fac in (1 + step, 1 / (1 + step)):
            cand = min(max(tp * fac, lo), hi)
            total, _, _, t_i = ev.block_objective(i, cand, cand, gs, inv_mus)
            if t_i <= imax and total > best[0] + 1e-14:
                best = (total, (cand, cand))
                tp = cand
                moved = True
        if not moved:
            step *= 0.5
    return best


def _max_feasible_tf_diag(ev, i, imax, lo, hi):
    if ev.channel_terms(i, lo, lo)[2] > imax:
        return None
    if ev.channel_terms(i, hi, hi)[2] <= imax:
        return hi
    a, b = lo, hi
    for _ in range(100):
        mid = 0.5 * (a + b)
        if ev.channel_terms(i, mid, mid)[2] <= imax:
            a = mid
        else:
            b = mid
    return a


def optimize_two_periods(all_params: Sequence[UnslottedChannelParams],
                         sensing: SensingModel, sensing_time: float,
                         constraint: InterferenceConstraint, *,
                         overhead_mode: str = "aggregate", n_starts: int = 8,
                         seed: int = 0, bounds: tuple[float, float] | None = None,
                         max_sweeps: int = 60,
                         sweep_tol: float = 1e-8) -> OptimizationResult:
    """Maximize throughput over per-channel (free, busy) sensing periods."""
    return _optimize(all_params, sensing, sensing_time, constraint,
                     diagonal=False, overhead_mode=overhead_mode,
                     n_starts=n_starts, seed=seed, bounds=bounds,
                     max_sweeps=max_sweeps, sweep_tol=sweep_tol)


def optimize_single_period(all_params: Sequence[UnslottedChannelParams],
                           sensing: SensingModel, sensing_time: float,
                           constraint: InterferenceConstraint, *,
                           overhead_mode: str = "aggregate", n_starts: int = 4,
                           seed: int = 0, bounds: tuple[float, float] | None = None,
                           max_sweeps: int = 60,
                           sweep_tol: float = 1e-8) -> OptimizationResult:
    """Single-period baseline: the two-period problem restricted to t_free == t_busy."""
    return _optimize(all_params, sensing, sensing_time, constraint,
                     diagonal=True, overhead_mode=overhead_mode,
                     n_starts=n_starts, seed=seed, bounds=bounds,
                     max_sweeps=max_sweeps, sweep_tol=sweep_tol)
