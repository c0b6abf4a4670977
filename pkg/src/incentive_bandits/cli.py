"""Command line interface.

Subcommands: ``run`` (single config), ``sweep`` (config over a horizon grid),
``check`` (invariant suites), ``report`` (scaling report over summaries).
Exit code is nonzero iff any hard assertion failed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (ExperimentConfig, load_summaries, run_experiment,
                      run_sweep, scaling_report)


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    data = cfg.to_dict()
    if args.algo:
        data["algorithm"] = args.algo
    if args.T:
        data["T"] = args.T[0]
    if args.K:
        data["K"] = args.K
    if args.d:
        data["d"] = args.d
    if args.delta is not None:
        data["delta"] = args.delta
    if args.c0 is not None:
        data["c0"] = args.c0
    if args.gamma is not None:
        data["gamma"] = args.gamma
    if args.mc_samples is not None:
        data.setdefault("mc", {})["n_samples"] = args.mc_samples
    if args.seed is not None:
        data["seeds"] = [args.seed]
    if args.seeds is not None:
        data["seeds"] = _parse_seeds(args.seeds)
    if args.out:
        data["out"] = args.out
    return ExperimentConfig.from_dict(data)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="path to a JSON config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seeds", type=str, default=None, help="A..B or comma list")
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--algo", type=str, default=None)
    p.add_argument("--T", type=int, nargs="*", default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--c0", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--mc-samples", type=int, default=None)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="incentive-bandits")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single config")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run a config over a horizon grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--write-rounds", action="store_true")

    p_check = sub.add_parser("check", help="run the invariant suites")

    p_report = sub.add_parser("report", help="scaling report over summaries")
    p_report.add_argument("--summaries", required=True,
                          help="summary.jsonl file or a directory containing them")
    p_report.add_argument("--exponent", type=float, default=0.5)
    p_report.add_argument("--mode", choices=["perround", "oracle", "bar"],
                          default="perround")

    args = parser.parse_args(argv)

    if args.command == "run":
        cfg = _apply_overrides(ExperimentConfig.load(args.config), args)
        summaries = run_experiment(cfg, out_dir=args.out)
        for record in summaries:
            print(json.dumps(record, sort_keys=True))
        return 0

    if args.command == "sweep":
        cfg = _apply_overrides(ExperimentConfig.load(args.config), args)
        grid = args.T if args.T else [cfg.T]
        summaries = run_sweep(cfg, grid, out_dir=args.out,
                              write_rounds=args.write_rounds)
        for record in summaries:
            print(json.dumps(record, sort_keys=True))
        return 0

    if args.command == "check":
        from .checks import run_checks
        failed = 0
        for name, passed, detail in run_checks():
            print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
            failed += 0 if passed else 1
        return 1 if failed else 0

    if args.command == "report":
        records = load_summaries(args.summaries)
        report = scaling_report(records, args.exponent, mode=args.mode)
        for T, mean, norm in zip(report.grid, report.mean_regret, report.normalized):
            print(f"T={T}: mean_regret={mean:.4f} normalized={norm:.6f}")
        print(f"max adjacent ratio: {report.max_ratio:.4f}")
        if report.flagged:
            print(f"flagged grid indices (normalized increased): {report.flagged}")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
