"""Command-line entry points: simulate, sweep, metrics, render.

Exit codes: 0 success, 2 configuration error, 3 runtime integrity error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (
    DEFAULT_SWEEP_GRIDS,
    SWEEP_AXES,
    SweepSpec,
    config_to_dict,
    load_config,
    parse_sweep_values,
)
from .errors import ConfigError, IntegrityError
from .experiment import recompute_metrics, render_svgs, run_experiment, run_sweep

EXIT_CONFIG = 2
EXIT_INTEGRITY = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feedsim",
        description="Agent-based simulator of content recommendation on fixed follow graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one experiment (all seeds) from a config file")
    sim.add_argument("--config", required=True, help="JSON config file ({} uses all defaults)")
    sim.add_argument("--seed-count", type=int, default=None,
                     help="override seeds with 0..N-1")
    sim.add_argument("--jobs", type=int, default=1, help="parallel workers across seeds")
    sim.add_argument("--out", default=None, help="output directory (overrides config)")
    sim.add_argument("--print-config", action="store_true",
                     help="echo the fully resolved config and exit")

    sw = sub.add_parser("sweep", help="run one experiment per value along a sweep axis")
    sw.add_argument("--config", required=True)
    sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sw.add_argument("--values", default=None,
                    help="comma-separated values (sbm_params entries as a:b:c:d); "
                         "defaults to the documented grid for the axis")
    sw.add_argument("--seed-count", type=int, default=None)
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--out", default=None)

    met = sub.add_parser("metrics", help="recompute all metrics from stored logs")
    met.add_argument("--log-dir", required=True)

    ren = sub.add_parser("render", help="render SVG plots from metric CSVs")
    ren.add_argument("--metrics-dir", required=True)
    return parser


def _resolve_config(args):
    from dataclasses import replace

    cfg = load_config(args.config)
    if getattr(args, "seed_count", None) is not None:
        if args.seed_count < 1:
            raise ConfigError("--seed-count must be >= 1")
        cfg = replace(cfg, seeds=tuple(range(args.seed_count)))
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cfg = _resolve_config(args)
            if args.print_config:
                print(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True))
                return 0
            out = run_experiment(cfg, jobs=args.jobs, out=args.out)
            print(f"experiment complete: {out}")
        elif args.command == "sweep":
            cfg = _resolve_config(args)
            if args.values is not None:
                values = parse_sweep_values(args.axis, args.values)
            else:
                values = tuple(DEFAULT_SWEEP_GRIDS[args.axis])
            out = run_sweep(cfg, SweepSpec(axis=args.axis, values=values),
                            jobs=args.jobs, out=args.out)
            print(f"sweep complete: {out}")
        elif args.command == "metrics":
            out = recompute_metrics(args.log_dir)
            print(f"metrics recomputed: {out}")
        elif args.command == "render":
            warnings = render_svgs(Path(args.metrics_dir))
            for w in warnings:
                print(f"warning: {w}", file=sys.stderr)
            print(f"rendered: {args.metrics_dir}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrityError as e:
        print(f"integrity error: {e}", file=sys.stderr)
        return EXIT_INTEGRITY
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
