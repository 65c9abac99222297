"""Command-line interface for running and inspecting regret experiments."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    OUT_DIR_ENV_VAR,
    POLICY_NAMES,
    build_ground_truth,
    load_config,
    load_summary,
    run_experiment,
    summarize,
    sweep,
    write_summary_csv,
)

_EPILOG = (
    "Config files are flat 'key = value' text; command-line flags override "
    f"file values. ${OUT_DIR_ENV_VAR} sets the default output directory. "
    "Auction ties go against the test bidder: a competitor matching the test "
    "bid outranks it."
)


def _add_config_flags(parser):
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--policy", choices=POLICY_NAMES)
    parser.add_argument("--n", type=int, help="auctions per timestep")
    parser.add_argument("--m", type=int, help="probe blocks per timestep (m+1 blocks total)")
    parser.add_argument("--T", type=int, help="number of timesteps")
    parser.add_argument("--reps", type=int, help="independent repetitions")
    parser.add_argument("--seed", type=int, help="base seed; repetition r uses base+r")
    parser.add_argument("--epsilon", type=float, help="exploration rate for epsilon_greedy")
    parser.add_argument("--v", help="known valuation (grid level) or 'none' for DSP policies")
    parser.add_argument(
        "--dsp-probe-index",
        choices=("regret", "utility"),
        help="index ranking the DSP policy's remaining probe bids",
    )
    parser.add_argument(
        "--update-anchor",
        action="store_true",
        default=None,
        help="let the known-valuation policy update statistics from its truthful block",
    )
    parser.add_argument("--out", help="output file or directory")


def _overrides(args) -> dict:
    mapping = {
        "policy": args.policy,
        "n": args.n,
        "m": args.m,
        "T": args.T,
        "repetitions": args.reps,
        "base_seed": args.seed,
        "epsilon": args.epsilon,
        "v_known": args.v,
        "dsp_probe_index": args.dsp_probe_index,
        "update_anchor": args.update_anchor,
    }
    return {key: value for key, value in mapping.items() if value is not None}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="icbandit", description=__doc__, epilog=_EPILOG)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment and write its CSV")
    _add_config_flags(run_p)

    sweep_p = sub.add_parser("sweep", help="run one experiment per value of a parameter")
    _add_config_flags(sweep_p)
    sweep_p.add_argument("--param", required=True, help="config field to sweep (e.g. n or m)")
    sweep_p.add_argument("--values", required=True, help="comma-separated values")

    sum_p = sub.add_parser("summarize", help="mean regret and 95% CI per (policy, t)")
    sum_p.add_argument("csv", nargs="+", help="experiment CSV files")
    sum_p.add_argument("--out", required=True, help="summary CSV path")

    plot_p = sub.add_parser("plot", help="plot a summary CSV with CI bands")
    plot_p.add_argument("summary", help="summary CSV from the summarize command")
    plot_p.add_argument("--out", required=True, help="output figure (.svg or .pdf)")
    plot_p.add_argument("--style", choices=("semilog", "linear"), default="semilog")
    plot_p.add_argument("--title")

    oracle_p = sub.add_parser("oracle", help="dump the ground-truth tables to CSV")
    _add_config_flags(oracle_p)

    args = parser.parse_args(argv)

    if args.command == "run":
        config = load_config(args.config, _overrides(args))
        path = run_experiment(config, out_path=args.out)
        print(f"wrote {path}")
        return 0

    if args.command == "sweep":
        config = load_config(args.config, _overrides(args))
        values = [_coerce_sweep_value(args.param, item) for item in args.values.split(",")]
        paths = sweep(config, args.param, values, out_dir=args.out)
        for path in paths:
            print(f"wrote {path}")
        return 0

    if args.command == "summarize":
        rows = summarize(args.csv)
        path = write_summary_csv(rows, args.out)
        print(f"wrote {path}")
        return 0

    if args.command == "plot":
        from .plotting import plot_summary

        path = plot_summary(load_summary(args.summary), args.out, style=args.style, title=args.title)
        print(f"wrote {path}")
        return 0

    if args.command == "oracle":
        config = load_config(args.config, _overrides(args))
        gt = build_ground_truth(config)
        out = Path(args.out) if args.out else config.resolved_out_dir() / "ground_truth.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        gt.to_csv(out)
        print(f"wrote {out}")
        return 0

    return 1


def _coerce_sweep_value(param: str, text: str):
    from .harness import _parse_value

    return _parse_value(param, text)


if __name__ == "__main__":
    sys.exit(main())
