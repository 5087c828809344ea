"""Timing comparison of the jitted kernels against their numpy fallbacks.

Run from the repository root:

    python benchmarks/bench_kernels.py

Each kernel is timed through its public driver: once on the compiled path
(after a warm-up call so compilation is excluded) and once with the kernel
swapped for its pure-Python twin.  Set COGMAC_NO_NUMBA=1 to confirm the
package degrades to the fallback everywhere.
"""

import time

import numpy as np

import cogmac.slotted._kernels as SK
import cogmac.unslotted._kernels as UK
import cogmac.slotted.whittle as W
from cogmac._accel import USING_NUMBA
from cogmac.model import SensingModel, SlottedChannelParams, UnslottedChannelParams
from cogmac.slotted.sim import SlottedConfig, simulate_slotted
from cogmac.slotted.whittle import WhittleConfig, build_index_table
from cogmac.unslotted.analytics import PeriodPair, delta_numeric, exponential_pdf
from cogmac.unslotted.sim import simulate_multi, simulate_single


def timed(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def swap(module, name):
    compiled = getattr(module, name)
    setattr(module, name, compiled.py_func)
    return compiled


def restore(module, name, compiled):
    setattr(module, name, compiled)


def bench_slotted():
    rng = np.random.default_rng(1)
    chans = tuple(SlottedChannelParams(float(a), float(b))
                  for a, b in rng.uniform(0.1, 0.9, size=(5, 2)))
    cfg = SlottedConfig(channels=chans, sensing=SensingModel.perfect(), L=5,
                        horizon=10_000, policy="full_sensing_blind")
    run = lambda: simulate_slotted(cfg, seed=7)
    run()
    fast = timed(run)
    compiled = swap(SK, "slot_loop")
    slow = timed(run, repeat=1)
    restore(SK, "slot_loop", compiled)
    return "slotted slot loop (1e4 slots, N=5, blind)", fast, slow


def bench_whittle_table():
    cfg = WhittleConfig(discount=0.999, grid_points=1001)

    def run():
        W._TABLE_CACHE.clear()
        build_index_table(0.23, 0.81, cfg, omega_points=257,
                          subsidy_points=257)

    run()
    fast = timed(run)
    c1 = swap(W, "_vi_converge")
    c2 = swap(W, "_gap_grid")
    slow = timed(run, repeat=1)
    restore(W, "_vi_converge", c1)
    restore(W, "_gap_grid", c2)
    return "whittle index table (257 subsidies x 257 beliefs)", fast, slow


def bench_delta_numeric():
    import cogmac.unslotted.analytics as A

    run = lambda: delta_numeric(exponential_pdf(0.2), exponential_pdf(1.0),
                                "free", 2.0, n=4000)
    run()
    fast = timed(run)
    compiled = swap(A, "_delta_tilde_series")
    slow = timed(run, repeat=1)
    restore(A, "_delta_tilde_series", compiled)
    return "renewal-equation oracle (n=4000)", fast, slow


def bench_unslotted_multi():
    params = [UnslottedChannelParams(0.2, 1.0), UnslottedChannelParams(0.15, 0.8),
              UnslottedChannelParams(0.11, 0.6)]
    periods = [PeriodPair(0.6, 0.3)] * 3
    run = lambda: simulate_multi(params, periods, SensingModel.perfect(),
                                 0.01, 10_000.0, seed=5)
    run()
    fast = timed(run)
    compiled = swap(UK, "multi_channel_walk")
    slow = timed(run, repeat=1)
    restore(UK, "multi_channel_walk", compiled)
    return "un-slotted multi-channel walk (1e4 time units)", fast, slow


def bench_unslotted_single():
    params = [UnslottedChannelParams(0.2, 1.0), UnslottedChannelParams(0.15, 0.8)]
    run = lambda: simulate_single(params, [0.5, 0.6], SensingModel.perfect(),
                                  0.01, 0.0, 10_000.0, seed=5)
    run()
    fast = timed(run)
    compiled = swap(UK, "single_channel_walk")
    slow = timed(run, repeat=1)
    restore(UK, "single_channel_walk", compiled)
    return "un-slotted single-channel walk (1e4 time units)", fast, slow


def main():
    print(f"numba enabled: {USING_NUMBA}")
    if not USING_NUMBA:
        print("compiled path unavailable; nothing to compare")
        return
    rows = [bench_slotted(), bench_whittle_table(), bench_delta_numeric(),
            bench_unslotted_multi(), bench_unslotted_single()]
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, fast, slow in rows:
        print(f"{name:<{width}}  {fast * 1e3:>8.2f}ms  {slow * 1e3:>8.2f}ms  "
              f"{slow / fast:>7.1f}x")


if __name__ == "__main__":
    main()
