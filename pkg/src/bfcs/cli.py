"""Command line entry point: ``python -m bfcs {run,sweep,replay,defaults}``.

Exit codes: 0 success, 1 configuration error, 2 some trials failed (or, for
``replay``, the rerun differs from the recorded row).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from . import harness as H

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _add_run_flags(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="experiment JSON file")
    src.add_argument("--paper-defaults", action="store_true",
                     help="use the reference 400x100, M=200 configuration")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="master seed, unsigned 64-bit")
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--workers", type=int, help="worker processes")


def parse_grid(specs):
    """``["0.1,1"]`` -> list; ``["NAME=0.1,1", ...]`` -> dict per algorithm."""
    per_alg, shared = {}, None
    for spec in specs:
        name, _, values = spec.rpartition("=")
        grid = [float(v) for v in values.split(",") if v.strip()]
        if name:
            per_alg[name] = grid
        else:
            shared = grid
    if per_alg and shared is not None:
        raise H.ConfigError("mix of shared and per-algorithm epsilon grids")
    return per_alg or shared


def build_parser():
    parser = argparse.ArgumentParser(prog="bfcs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_flags(sub.add_parser("run", help="run an experiment"))

    sweep = sub.add_parser("sweep", help="run over an epsilon grid and report the best points")
    _add_run_flags(sweep)
    sweep.add_argument("--epsilon-grid", action="append", required=True, metavar="[NAME=]E1,E2,...",
                       help="comma separated grid, shared or for one algorithm (repeatable)")

    rep = sub.add_parser("replay", help="rerun one row of a results.csv")
    rep.add_argument("--csv", required=True)
    rep.add_argument("--row", type=int, required=True, help="0-based data row")

    sub.add_parser("defaults", help="print the reference configuration as JSON")
    return parser


def _resolve_config(args):
    cfg = H.paper_config() if args.paper_defaults else H.load_config(args.config)
    changes = {}
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.trials is not None:
        changes["n_trials"] = args.trials
    if args.workers is not None:
        changes["workers"] = args.workers
    return replace(cfg, **changes) if changes else cfg


def _print_summary(summary):
    print(f"{'algorithm':<14} {'best eps':>10} {'done':>6} {'SNR mean':>9} {'SNR std':>8}")
    for row in summary:
        eps = "" if row["best_epsilon"] is None else f"{row['best_epsilon']:g}"
        print(f"{row['algorithm']:<14} {eps:>10} {row['completed']:>3}/{row['trials']:<2} "
              f"{row['snr_db_mean']:9.3f} {row['snr_db_std']:8.3f}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "defaults":
            print(json.dumps(H.paper_config().to_dict(), indent=2))
            return EXIT_OK
        if args.command == "replay":
            recorded, replayed = H.replay_row(args.csv, args.row)
            same = H.same_result(recorded, replayed)
            print(f"{recorded.algorithm} trial {recorded.trial} eps={recorded.epsilon}: "
                  f"{'identical' if same else 'MISMATCH'}")
            if not same:
                for k, v in recorded.row().items():
                    w = replayed.row()[k]
                    if v != w:
                        print(f"  {k}: recorded {v} replayed {w}")
            return EXIT_OK if same else EXIT_PARTIAL
        cfg = _resolve_config(args)
        if args.command == "sweep":
            best, result = H.sweep_epsilon(cfg, parse_grid(args.epsilon_grid))
        else:
            result = H.run_experiment(cfg)
    except (H.ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _print_summary(result.summary)
    if result.n_failed:
        print(f"{result.n_failed} of {len(result.results)} runs failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
