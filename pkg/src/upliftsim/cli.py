"""Command line front door.

    upliftsim validate CFG
    upliftsim surface CFG --arm A --t T --res R [--out CSV] [--svg SVG] [--slice J=V ...]
    upliftsim run MANIFEST [--jobs J]
    upliftsim selfcheck CFG --draws D
    upliftsim fixtures [--export DIR]

Exit codes: 0 ok, 1 runtime failure, 2 configuration error, 3 selfcheck failure.
"""

from __future__ import annotations

import argparse
import logging
import shutil
import sys
from pathlib import Path

from . import fixtures
from .config import load_config, load_manifest
from .errors import ConfigError
from .runner import PARTIAL_MARKER, run_manifest
from .selfcheck import MIN_DRAWS, run_selfcheck
from .surface import render_svg, write_surface_csv

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_SELFCHECK = 0, 1, 2, 3


def _slice(text: str) -> tuple[int, float]:
    try:
        dim, value = text.split("=", 1)
        return int(dim), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected DIM=VALUE, got {text!r}") from None


def cmd_validate(args) -> int:
    load_config(args.config)
    print("OK")
    return EXIT_OK


def cmd_surface(args) -> int:
    config = load_config(args.config)
    if args.res < 2:
        raise ConfigError("--res", f"grid resolution must be >= 2, got {args.res}")
    if args.t < 0:
        raise ConfigError("--t", "time must be >= 0")
    if not 0 <= args.arm < config.n_arms:
        raise ConfigError("--arm", f"must be in [0, {config.n_arms - 1}]")
    slices = dict(args.slice or [])
    if args.svg and config.policy.m_domain > 2:
        raise ConfigError("--svg", "SVG output needs M <= 2")
    write_surface_csv(args.out or sys.stdout, config, args.arm, args.t, args.res, slices)
    if args.svg:
        Path(args.svg).write_text(render_svg(config, args.arm, args.t, args.res))
    return EXIT_OK


def cmd_run(args) -> int:
    manifest = load_manifest(args.manifest)
    summary, failed = run_manifest(manifest, jobs=args.jobs)
    for row in summary:
        print(
            f"{row['agent']}: seeds={len(row['seeds'])} rounds={row['rounds']} "
            f"cum_regret_mean={row['cum_regret_mean']} cum_regret_std={row['cum_regret_std']} "
            f"accuracy_mean={row['accuracy_mean']}"
        )
    if failed:
        print(f"{len(failed)} episode(s) failed; see {manifest.output / PARTIAL_MARKER}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    config = load_config(args.config)
    if args.draws < MIN_DRAWS:
        raise ConfigError("--draws", f"must be >= {MIN_DRAWS}")
    results = run_selfcheck(config, args.draws)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("selfcheck failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_SELFCHECK
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if args.export:
        dest = Path(args.export)
        dest.mkdir(parents=True, exist_ok=True)
        src_dir = fixtures.fixture_path(fixtures.NAMES[0]).parent
        for src in sorted(src_dir.iterdir()):
            if src.suffix in (".json", ".csv"):
                shutil.copy(src, dest / src.name)
    for name in fixtures.NAMES:
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="upliftsim", description="Causal uplift simulation environments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an environment config")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("surface", help="dump the noiseless response lattice of one arm")
    p.add_argument("config")
    p.add_argument("--arm", type=int, required=True)
    p.add_argument("--t", type=int, default=0)
    p.add_argument("--res", type=int, default=101)
    p.add_argument("--out", help="CSV destination (stdout if omitted)")
    p.add_argument("--svg", help="also write a treated-vs-control SVG overlay (M <= 2)")
    p.add_argument("--slice", type=_slice, action="append", metavar="DIM=VALUE",
                   help="pin a domain dimension to one value")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("run", help="run every agent/seed pair of a manifest")
    p.add_argument("manifest")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("selfcheck", help="Monte-Carlo checks of the stochastic contracts")
    p.add_argument("config")
    p.add_argument("--draws", type=int, default=MIN_DRAWS)
    p.set_defaults(func=cmd_selfcheck)

    p = sub.add_parser("fixtures", help="list (and optionally export) bundled configs")
    p.add_argument("--export", metavar="DIR")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
