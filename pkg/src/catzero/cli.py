"""Command-line interface: ``catzero bound | simulate | verify``.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__, bounds
from .errors import CatZeroError
from .io import ParseError, build_manifest, load_measure, space_to_dict
from .montecarlo import ExperimentConfig, run_tail_experiment
from .verify import SUITES, run_suite

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2
SEED_ENV = "CATZERO_SEED"
GRID_DECIMALS = 12


class UsageError(Exception):
    pass


def parse_grid(text):
    """``start:step:stop`` (both ends included within half a step) or a single value."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}") from None
    if len(nums) == 1:
        return [nums[0]]
    if len(nums) != 3:
        raise argparse.ArgumentTypeError("grid must be start:step:stop")
    start, step, stop = nums
    if not (math.isfinite(start) and math.isfinite(step) and math.isfinite(stop)) or step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    return [round(start + i * step, GRID_DECIMALS) for i in range(count)]


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def default_workers():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser():
    parser = _Parser(prog="catzero", description="Inductive means in CAT(0) spaces and their tail bounds.")
    parser.add_argument("--version", action="version", version=f"catzero {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", help="evaluate a closed-form tail bound")
    b.add_argument("--space", choices=("rtree", "hadamard", "ledoux"), required=True)
    b.add_argument("--n", type=int, required=True, help="sample count (ledoux: number of factors)")
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--r", type=float)
    g.add_argument("--r-grid", type=parse_grid)
    b.add_argument("--diam", type=float, required=True, help="support diameter (ledoux: factor diameter)")
    b.add_argument("--m", type=int, help="manifold dimension (hadamard only)")
    b.add_argument("--json", action="store_true")

    s = sub.add_parser("simulate", help="Monte Carlo tail experiment")
    s.add_argument("--measure", required=True, type=Path)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--r-grid", type=parse_grid, default=[0.0])
    s.add_argument("--seed", type=int)
    s.add_argument("--out", type=Path, default=Path("."))
    s.add_argument("--workers", type=int)
    s.add_argument("--confidence", type=float, default=0.99)

    v = sub.add_parser("verify", help="run randomized invariant suites")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--seed", type=int)
    v.add_argument("--workers", type=int, default=1)
    return parser


# -- subcommands ----------------------------------------------------------------


def cmd_bound(args, out):
    if args.m is not None and args.space != "hadamard":
        raise UsageError("--m is only valid with --space hadamard")
    if args.space == "hadamard" and args.m is None:
        raise UsageError("--space hadamard requires --m")
    if args.diam <= 0 or args.n < 1:
        raise UsageError("need --n >= 1 and --diam > 0")
    grid = [args.r] if args.r is not None else args.r_grid
    try:
        if args.space == "rtree":
            rows = [(r, bounds.rtree_tail_bound(args.n, r, args.diam)) for r in grid]
        elif args.space == "hadamard":
            rows = [(r, bounds.hadamard_tail_bound(args.n, r, args.diam, args.m)) for r in grid]
        else:
            diameters = [args.diam] * args.n
            rows = [(r, bounds.ledoux_deviation_bound(r, diameters)) for r in grid]
    except CatZeroError as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        payload = {
            "space": args.space,
            "n": args.n,
            "diam": args.diam,
            "m": args.m,
            "rows": [{"r": r, "bound": v} for r, v in rows],
        }
        print(json.dumps(payload, indent=2), file=out)
    else:
        print(f"{'r':>12}  bound", file=out)
        for r, v in rows:
            print(f"{r:>12.6g}  {v:.6g}", file=out)
    return EXIT_OK


def cmd_simulate(args, out):
    seed = default_seed() if args.seed is None else args.seed
    workers = default_workers() if args.workers is None else args.workers
    if workers < 1:
        raise UsageError("--workers must be positive")
    measure = load_measure(args.measure)
    try:
        cfg = ExperimentConfig(measure, args.n, args.trials, tuple(args.r_grid), seed, args.confidence)
    except CatZeroError as exc:
        raise UsageError(str(exc)) from None
    report = run_tail_experiment(cfg, workers=workers)

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "tail_report.csv").write_text(report.to_csv(), encoding="utf-8")
    (args.out / "tail_report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    config = cfg.describe()
    config["space"] = space_to_dict(measure.space)
    config["measure_file"] = str(args.measure)
    manifest = build_manifest("simulate", config, seed, inputs=[args.measure])
    (args.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    print(report.to_csv(), end="", file=out)
    if not report.passed:
        bad = ", ".join(format(r, "g") for r in report.violations)
        print(f"bound violated at r = {bad}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_verify(args, out):
    seed = default_seed() if args.seed is None else args.seed
    names = SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in names:
        res = run_suite(name, seed, workers=args.workers)
        print(res.summary(), file=out)
        ok &= res.ok
    if len(names) > 1:
        print(f"all: {'pass' if ok else 'FAIL'}", file=out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {"bound": cmd_bound, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"catzero: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CatZeroError as exc:
        print(f"catzero: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
