"""Whittle index of a two-state restless channel, computed by definition.

The index at belief ``omega`` is the passivity subsidy at which sensing the
channel (active) and leaving it alone (passive) have equal discounted value
in the single-armed problem.  The value function is computed by value
iteration on a uniform belief grid with linear interpolation; the index is
then found by bisection on the subsidy.  ``build_index_table`` inverts a
subsidy sweep into a full index curve over the belief grid, which is what
the simulator interpolates (one value iteration serves every belief, so the
sweep is far cheaper than per-belief bisections).

Convergence note: the active/passive value gap is invariant to adding a
constant to the value function, so iteration stops when the *span* of the
successive difference collapses, long before the sup norm does at discounts
near one.  The sup-norm test and the iteration cap are kept as secondary
stops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._accel import jit_kernel
from ..errors import ConvergenceError


@dataclass(frozen=True)
class WhittleConfig:
    """Discount and numerical tolerances for the index computation."""

    discount: float = 0.9999
    grid_points: int = 2001
    value_tol: float = 1e-9
    subsidy_tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must be in [0, 1), got {self.discount}")
        if self.grid_points < 101:
            raise ValueError(f"grid_points must be >= 101, got {self.grid_points}")
        if self.value_tol <= 0.0 or self.subsidy_tol <= 0.0:
            raise ValueError("tolerances must be > 0")

    @property
    def max_iter(self) -> int:
        return 10 * int(math.ceil(1.0 / (1.0 - self.discount)))


@jit_kernel
def _vi_converge(v, v_next, m, p01, p11, beta, value_tol, span_tol, max_iter):
    """Value iteration under subsidy m; v is updated in place."""
    g = v.shape[0]
    g1 = g - 1
    for _ in range(max_iter):
        # interpolated continuation values at the two observation resets
        pos = p11 * g1
        i11 = int(pos)
        if i11 > g - 2:
            i11 = g - 2
        f11 = pos - i11
        v11 = v[i11] * (1.0 - f11) + v[i11 + 1] * f11
        pos = p01 * g1
        i01 = int(pos)
        if i01 > g - 2:
            i01 = g - 2
        f01 = pos - i01
        v01 = v[i01] * (1.0 - f01) + v[i01 + 1] * f01

        dmin = 1e300
        dmax = -1e300
        for k in range(g):
            w = k / g1
            tau = w * p11 + (1.0 - w) * p01
            pos = tau * g1
            it = int(pos)
            if it > g - 2:
                it = g - 2
            ft = pos - it
            vt = v[it] * (1.0 - ft) + v[it + 1] * ft
            va = w + beta * (w * v11 + (1.0 - w) * v01)
            vp = m + beta * vt
            nv = va if va > vp else vp
            v_next[k] = nv
            d = nv - v[k]
            if d < dmin:
                dmin = d
            if d > dmax:
                dmax = d
        for k in range(g):
            v[k] = v_next[k]
        amax = dmax if dmax > -dmin else -dmin
        if (dmax - dmin) < span_tol or amax < value_tol:
            break


@jit_kernel
def _gap_grid(v, m, p01, p11, beta, out):
    """Active-minus-passive value gap at every grid belief."""
    g = v.shape[0]
    g1 = g - 1
    pos = p11 * g1
    i11 = int(pos)
    if i11 > g - 2:
        i11 = g - 2
    f11 = pos - i11
    v11 = v[i11] * (1.0 - f11) + v[i11 + 1] * f11
    pos = p01 * g1
    i01 = int(pos)
    if i01 > g - 2:
        i01 = g - 2
    f01 = pos - i01
    v01 = v[i01] * (1.0 - f01) + v[i01 + 1] * f01
    for k in range(g):
        w = k / g1
        tau = w * p11 + (1.0 - w) * p01
        pos = tau * g1
        it = int(pos)
        if it > g - 2:
            it = g - 2
        ft = pos - it
        vt = v[it] * (1.0 - ft) + v[it + 1] * ft
        va = w + beta * (w * v11 + (1.0 - w) * v01)
        vp = m + beta * vt
        out[k] = va - vp


def _gap_at(v, omega, m, p01, p11, beta):
    g1 = v.shape[0] - 1
    grid = np.arange(v.shape[0]) / g1
    v11 = np.interp(p11, grid, v)
    v01 = np.interp(p01, grid, v)
    vt = np.interp(omega * p11 + (1.0 - omega) * p01, grid, v)
    va = omega + beta * (omega * v11 + (1.0 - omega) * v01)
    vp = m + beta * vt
    return va - vp


# Stopping span for the successive-difference vector: safely above the
# floating-point noise floor of the value scale (~1/(1-beta)), while the
# induced gap error stays orders of magnitude below the subsidy tolerance.
_SPAN_TOL = 1e-10


def whittle_index(omega: float, p01: float, p11: float,
                  cfg: WhittleConfig | None = None) -> float:
    """Subsidy equalizing active and passive value at belief ``omega``."""
    if cfg is None:
        cfg = WhittleConfig()
    for name, p in (("omega", omega), ("p01", p01), ("p11", p11)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {p}")
    beta = cfg.discount
    if beta == 0.0:
        return omega

    g = cfg.grid_points
    v = np.zeros(g)
    v_next = np.zeros(g)

    def gap(m):
        _vi_converge(v, v_next, m, p01, p11, beta, cfg.value_tol, _SPAN_TOL,
                     cfg.max_iter)
        return _gap_at(v, omega, m, p01, p11, beta)

    lo, hi = 0.0, 1.0
    cap = 1.0 / (1.0 - beta)
    g_hi = gap(hi)
    while g_hi > 0.0:
        hi *= 2.0
        if hi > cap:
            raise ConvergenceError(
                f"subsidy bracket [0, {cap}] failed to contain the index")
        g_hi = gap(hi)
    if gap(lo) < 0.0:
        return 0.0
    while hi - lo > cfg.subsidy_tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_TABLE_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def build_index_table(p01: float, p11: float, cfg: WhittleConfig | None = None,
                      *, omega_points: int = 401,
                      subsidy_points: int = 513) -> tuple[np.ndarray, np.ndarray]:
    """Index curve W(omega) on a uniform belief grid, by subsidy sweep.

    For each subsidy on an ascending grid, one value iteration yields the
    value gap at every belief; the index at a belief is the subsidy where
    its gap crosses zero (the gap decreases in the subsidy).  Results are
    memoized per (p01, p11, config) since the informed policies reuse one
    curve for an entire experiment.
    """
    if cfg is None:
        cfg = WhittleConfig()
    key = (round(p01, 12), round(p11, 12), cfg.discount, cfg.grid_points,
           omega_points, subsidy_points)
    hit = _TABLE_CACHE.get(key)
    if hit is not None:
        return hit

    beta = cfg.discount
    omega_grid = np.linspace(0.0, 1.0, omega_points)
    if beta == 0.0:
        table = (omega_grid, omega_grid.copy())
        _TABLE_CACHE[key] = table
        return table

    v = np.zeros(omega_points)
    v_next = np.zeros(omega_points)
    gaps = np.zeros(omega_points)
    w = np.full(omega_points, np.nan)
    ms = np.linspace(0.0, 1.0, subsidy_points)
    prev_gap = None
    prev_m = 0.0
    for m in ms:
        _vi_converge(v, v_next, m, p01, p11, beta, cfg.value_tol, _SPAN_TOL,
                     cfg.max_iter)
        _gap_grid(v, m, p01, p11, beta, gaps)
        if prev_gap is None:
            w[gaps <= 0.0] = 0.0
        else:
            crossed = np.isnan(w) & (gaps <= 0.0)
            if crossed.any():
                denom = prev_gap[crossed] - gaps[crossed]
                frac = np.where(denom > 0.0, prev_gap[crossed] / denom, 1.0)
                w[crossed] = prev_m + frac * (m - prev_m)
        prev_gap = gaps.copy()
        prev_m = m
        if not np.isnan(w).any():
            break
    # the gap at omega=1 is exactly 1 - m, so the sweep always terminates
    w[np.isnan(w)] = 1.0
    table = (omega_grid, w)
    _TABLE_CACHE[key] = table
    return table


def index_from_table(table: tuple[np.ndarray, np.ndarray],
                     omega: float | np.ndarray) -> np.ndarray:
    grid, w = table
    return np.interp(omega, grid, w)
