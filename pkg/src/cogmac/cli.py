"""Command-line entry point: run, optimize or validate an experiment.

Exit codes: 0 success, 2 configuration error, 3 infeasible optimization,
4 solver non-convergence.  Given the same config and seed the written CSV
files are byte-identical across invocations.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, parse_config, serialize_config
from .errors import ConfigError, ConvergenceError, InfeasibleError
from .slotted.beliefs import genie_throughput_bound
from .slotted.sim import SlottedConfig, monte_carlo, run_seed
from .slotted.whittle import WhittleConfig
from .unslotted.analytics import PeriodPair
from .unslotted.optimizer import (
    InterferenceConstraint,
    OptimizationResult,
    optimize_single_period,
    optimize_two_periods,
    solve_access_period,
)
from .unslotted.sim import simulate_multi, simulate_single

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NONCONVERGENCE = 4


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _run_slotted(config: ExperimentConfig, out_dir: Path) -> None:
    channels = config.slotted_channels
    bound = genie_throughput_bound(list(channels))
    horizon = config.horizon_slots
    wcfg = WhittleConfig(discount=config.whittle_discount, grid_points=1001)
    summary_rows = []
    traces = {}
    for policy in config.policies:
        L = config.L
        if policy in ("full_sensing_informed", "full_sensing_blind"):
            L = len(channels)
        elif policy == "ucb":
            L = 1
        scfg = SlottedConfig(
            channels=channels, sensing=config.sensing, L=L, horizon=horizon,
            policy=policy, learning_period=config.learning_period,
            seed=config.seed, block_count=config.runs,
            access_gated_counting=config.access_gated_counting, whittle=wcfg)
        mc = monte_carlo(scfg)
        window = mc.window_mean(horizon // 2, horizon)
        summary_rows.append([
            config.scenario, policy, config.runs, mc.mean_throughput,
            mc.stderr, window, bound, mc.collisions, mc.resync_events,
            mc.sync_violations,
        ])
        traces[policy] = mc.mean_trace
    _write_csv(out_dir / "summary.csv", [
        "scenario", "policy", "runs", "mean_throughput[bw_per_slot]",
        "stderr[bw_per_slot]", "final_window_mean[bw_per_slot]",
        "genie_bound[bw_per_slot]", "collisions[per_run]",
        "resync_events[per_run]", "sync_violations[count]",
    ], summary_rows)

    stride = max(1, horizon // 2000)
    slots = np.arange(0, horizon, stride)
    header = ["slot"] + [f"{p}_cum_throughput[bw_per_slot]"
                         for p in config.policies]
    rows = [[int(j + 1)] + [traces[p][j] for p in config.policies]
            for j in slots]
    _write_csv(out_dir / "trace.csv", header, rows)


def _optimize_unslotted(config: ExperimentConfig) \
        -> tuple[OptimizationResult, OptimizationResult]:
    constraint = InterferenceConstraint(config.interference_max)
    two = optimize_two_periods(
        config.unslotted_channels, config.sensing, config.sensing_time,
        constraint, overhead_mode=config.overhead_mode,
        n_starts=config.optimizer_starts, seed=config.seed)
    one = optimize_single_period(
        config.unslotted_channels, config.sensing, config.sensing_time,
        constraint, overhead_mode=config.overhead_mode,
        n_starts=max(2, config.optimizer_starts // 2), seed=config.seed)
    return two, one


def _run_unslotted_multi(config: ExperimentConfig, out_dir: Path) -> None:
    two, one = _optimize_unslotted(config)
    horizon = config.horizon_time
    n_bins = 200
    summary_rows = []
    bin_traces = {}
    for label, result in (("two_period", two), ("single_period", one)):
        empirical = np.zeros(config.runs)
        bins = np.zeros(n_bins)
        for r in range(config.runs):
            m = simulate_multi(config.unslotted_channels, result.periods,
                               config.sensing, config.sensing_time, horizon,
                               seed=run_seed(config.seed, r), n_bins=n_bins)
            empirical[r] = m.throughput
            bins += m.throughput_bins
        stderr = (empirical.std(ddof=1) / np.sqrt(config.runs)
                  if config.runs > 1 else 0.0)
        summary_rows.append([
            config.scenario, label, config.runs, result.objective,
            empirical.mean(), stderr, min(result.constraint_slack),
            result.converged,
        ])
        bin_traces[label] = bins / config.runs
    _write_csv(out_dir / "summary.csv", [
        "scenario", "case", "runs", "analytic_R[fraction]",
        "empirical_R_mean[fraction]", "empirical_R_stderr[fraction]",
        "min_constraint_slack[fraction]", "converged",
    ], summary_rows)

    _write_csv(out_dir / "periods.csv", [
        "channel", "t_free_two[s]", "t_busy_two[s]", "t_single[s]",
        "interference_limit[fraction]",
    ], [[i, two.periods[i].t_free, two.periods[i].t_busy,
         one.periods[i].t_free, config.interference_max[i]]
        for i in range(len(config.unslotted_channels))])

    bin_w = horizon / n_bins
    _write_csv(out_dir / "trace.csv", [
        "time_bin_start[s]", "two_period_throughput[fraction]",
        "single_period_throughput[fraction]",
    ], [[b * bin_w, bin_traces["two_period"][b], bin_traces["single_period"][b]]
        for b in range(n_bins)])


def _run_unslotted_single(config: ExperimentConfig, out_dir: Path) -> None:
    channels = config.unslotted_channels
    tfstar = [solve_access_period(c, config.sensing, imax)
              for c, imax in zip(channels, config.interference_max)]
    n = len(channels)
    interference = np.zeros((config.runs, n))
    throughput = np.zeros(config.runs)
    delays = np.zeros(config.runs)
    sync_failures = 0
    bins = np.zeros(200)
    for r in range(config.runs):
        m = simulate_single(channels, tfstar, config.sensing,
                            config.sensing_time, config.rts_cts_duration,
                            config.horizon_time, seed=run_seed(config.seed, r))
        interference[r] = m.interference
        throughput[r] = m.throughput
        delays[r] = m.mean_search_delay
        sync_failures += m.sync_failures
        bins += m.throughput_bins
    rows = []
    for i in range(n):
        se = (interference[:, i].std(ddof=1) / np.sqrt(config.runs)
              if config.runs > 1 else 0.0)
        rows.append([config.scenario, i, config.runs, tfstar[i],
                     interference[:, i].mean(), se,
                     config.interference_max[i], sync_failures,
                     float(np.nanmean(delays)), throughput.mean()])
    _write_csv(out_dir / "summary.csv", [
        "scenario", "channel", "runs", "t_free_star[s]",
        "measured_interference[fraction]", "interference_stderr[fraction]",
        "interference_limit[fraction]", "sync_failures[count]",
        "mean_search_delay[s]", "mean_throughput[fraction]",
    ], rows)
    bin_w = config.horizon_time / 200
    _write_csv(out_dir / "trace.csv",
               ["time_bin_start[s]", "throughput[fraction]"],
               [[b * bin_w, bins[b] / config.runs] for b in range(200)])


def run_experiment(config_path: str | Path, *, seed: int | None = None,
                   runs: int | None = None,
                   out_dir: str | None = None) -> Path:
    """Execute a config end to end; returns the output directory."""
    config = parse_config(config_path)
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if runs is not None:
        overrides["runs"] = runs
    if out_dir is not None:
        overrides["out_dir"] = out_dir
    if overrides:
        from .config import config_from_dict
        doc = dict(config.raw)
        doc.update(overrides)
        config = config_from_dict(doc)

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.scenario in ("slotted_full", "slotted_partial"):
        _run_slotted(config, out)
    elif config.scenario == "unslotted_multi":
        _run_unslotted_multi(config, out)
    else:
        _run_unslotted_single(config, out)
    return out


def _cmd_run(args) -> int:
    out = run_experiment(args.config, seed=args.seed, runs=args.runs,
                         out_dir=args.out_dir)
    print(f"wrote {out / 'summary.csv'}")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    config = parse_config(args.config)
    if config.scenario == "unslotted_multi":
        two, one = _optimize_unslotted(config)
        print("channel  t_free*      t_busy*      t_single*")
        for i, (p2, p1) in enumerate(zip(two.periods, one.periods)):
            print(f"{i:7d}  {p2.t_free:<11.6g}  {p2.t_busy:<11.6g}  "
                  f"{p1.t_free:<11.6g}")
        print(f"two_period_R={two.objective:.6g}  "
              f"single_period_R={one.objective:.6g}")
    elif config.scenario == "unslotted_single":
        print("channel  t_free*")
        for i, (c, imax) in enumerate(zip(config.unslotted_channels,
                                          config.interference_max)):
            tf = solve_access_period(c, config.sensing, imax)
            print(f"{i:7d}  {tf:.6g}")
    else:
        raise ConfigError(
            f"optimize applies to un-slotted scenarios, not {config.scenario}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = parse_config(args.config)
    sys.stdout.write(serialize_config(config))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cogmac",
        description="Cognitive MAC protocol experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", _cmd_run), ("optimize", _cmd_optimize),
                     ("validate", _cmd_validate)):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--runs", type=int, default=None)
        p.add_argument("--out-dir", default=None)
        p.set_defaults(func=fn)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
