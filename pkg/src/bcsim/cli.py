"""Command line entry point: ``bcsim run`` and ``bcsim bounds``."""

from __future__ import annotations

import argparse
import logging
import sys

from bcsim.bounds import DomainError, compute_bounds, format_bounds
from bcsim.core import ConfigInvalid
from bcsim.scenarios import Scenario, default_workers, preset_names, run_scenario

log = logging.getLogger("bcsim")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario preset or TOML file")
    run.add_argument("--scenario", required=True, help=f"preset ({', '.join(preset_names())}) or path")
    run.add_argument("--n", type=int, action="append", help="party count; repeat to sweep")
    run.add_argument("--kappa", type=int)
    run.add_argument("--eps", help="honest fraction, decimal or a/b")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", default="results", help="output directory")
    run.add_argument("--workers", type=int, default=None, help="worker processes (default from BCSIM_WORKERS)")

    bounds = sub.add_parser("bounds", help="print closed-form quantities")
    bounds.add_argument("--n", type=int, required=True)
    bounds.add_argument("--eps", required=True)
    bounds.add_argument("--kappa", type=int, required=True)
    return parser


def _cmd_run(args) -> int:
    scenario = Scenario.load(args.scenario).override(args.n, args.kappa, args.eps, args.trials, args.seed)
    scenario.configs()  # validate every point before running anything
    workers = args.workers or default_workers()
    csv_path, json_path, summary = run_scenario(scenario, args.out, workers)
    errors = summary["overall"]["errors"]
    if errors:
        log.warning("%d trial(s) ended with an error", errors)
    print(csv_path)
    print(json_path)
    return 0


def _cmd_bounds(args) -> int:
    from fractions import Fraction

    eps = Fraction(args.eps)
    print(format_bounds(compute_bounds(args.n, eps, args.kappa)))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_bounds(args)
    except (ConfigInvalid, DomainError, ValueError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
