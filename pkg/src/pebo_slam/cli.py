"""Command-line entry point.

    pebo-slam run <scenario-file|builtin> [--seed N] [--noise] [--out DIR] [--decimate K]
    pebo-slam report <csv> [--tol T] [--window W]
    pebo-slam scenarios list
    pebo-slam scenarios show <name>

Exit codes: 0 success, 1 configuration error, 2 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import scenario as scn
from .excitation import DEFAULT_TOL, DEFAULT_WINDOW, report_file
from .harness import NumericFailure, run, with_overrides, write_outputs
from .manifold import DegenerateVector
from .simulator import DegenerateBearing

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _load_scenario(name: str) -> scn.Scenario:
    p = Path(name)
    if p.is_file():
        return scn.load(p)
    if name in scn.BUILTINS:
        return scn.builtin(name)
    raise scn.ScenarioError(f"{name!r} is neither a scenario file nor a builtin "
                            f"({', '.join(scn.BUILTINS)})")


def cmd_run(args) -> int:
    try:
        sc = _load_scenario(args.scenario)
        sc = with_overrides(sc, seed=args.seed, noise=True if args.noise else None,
                            decimate=args.decimate, out=args.out).validate()
    except scn.ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(sc)
    except (NumericFailure, DegenerateBearing, DegenerateVector, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    stem = sc.name + (f"_seed{sc.noise.seed}" if sc.noise.enabled else "")
    csv_path, sum_path = write_outputs(result, sc.output.dir, stem)
    key = "terminal" if "terminal" in result.summary else "initial"
    s = result.summary[key]
    print(f"wrote {csv_path} and {sum_path}")
    print(f"{key} t={s['t']:g}: |x err|={s['pos_err']:.3e} |R err|={s['att_err']:.3e} "
          f"max |zv err|={max(s['zv_err']):.3e} max |zB err|={max(s['zb_err']):.3e}")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        rep = report_file(args.csv, tol=args.tol, window=args.window)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for r in rep:
        print(r.line())
    if args.json:
        print(json.dumps([r.__dict__ for r in rep], indent=2))
    return EXIT_OK


def cmd_scenarios(args) -> int:
    if args.action == "list":
        for name, (desc, _) in scn.BUILTINS.items():
            print(f"{name:16s} {desc}")
        return EXIT_OK
    if not args.name or args.name not in scn.BUILTINS:
        print(f"config error: unknown builtin {args.name!r}", file=sys.stderr)
        return EXIT_CONFIG
    print(scn.builtin(args.name).dump(), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pebo-slam", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write CSV + summary")
    r.add_argument("scenario", help="YAML scenario file or builtin name")
    r.add_argument("--seed", type=int)
    r.add_argument("--noise", action="store_true", help="enable measurement noise")
    r.add_argument("--out", help="output directory")
    r.add_argument("--decimate", type=int, help="write every K-th step")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("report", help="excitation certificates from a run CSV")
    e.add_argument("csv")
    e.add_argument("--tol", type=float, default=DEFAULT_TOL)
    e.add_argument("--window", type=float, default=DEFAULT_WINDOW)
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_report)

    s = sub.add_parser("scenarios", help="list or print builtin scenarios")
    s.add_argument("action", choices=["list", "show"])
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_scenarios)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
