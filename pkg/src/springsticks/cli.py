"""Command-line entry point: ``ss <experiment> --config <path> [options]``.

Exit codes: 0 on success, 2 for configuration errors, 3 for numeric failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import EXPERIMENT_IDS, get, load_config
from .drivers import run_experiment
from .errors import ConfigError, SpringSticksError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ss",
        description="Springs-and-sticks training, sweeps, and thermodynamics drivers.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENT_IDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="flat 'section.key = value' file")
        p.add_argument("--seed", type=int, default=None,
                       help="override experiment.seed (default 42)")
        p.add_argument("--out", default=None, help="override output.dir")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else int(get(cfg, "experiment.seed", 42))
        out = Path(args.out if args.out is not None else get(cfg, "output.dir", "runs/" + args.experiment))
        run_experiment(args.experiment, cfg, out, seed, jobs=max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpringSticksError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
