"""Command-line entry point: ns1d {run, sweep, mms, validate-h}.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, NewtonDivergenceError, PositivityError
from .harness import (apply_overrides, default_config, load_config, run, sweep,
                      validate_h_config)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _add_common(parser):
    parser.add_argument("--config", help="path to a flat key=value config file")
    parser.add_argument("--preset", default="gauss-pulse",
                        help="preset to use when no config file is given")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ns1d",
        description="1D viscous heat-conducting gas in Lagrangian coordinates")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation run")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="parameter sweep of independent runs")
    _add_common(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         choices=("alpha", "gamma", "amplitude"))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated list of parameter values")

    p_mms = sub.add_parser("mms", help="manufactured-solution convergence study")
    _add_common(p_mms)

    p_val = sub.add_parser("validate-h", help="empirical admissibility check of h")
    _add_common(p_val)

    return parser


def _load(args):
    if args.config:
        config = load_config(args.config)
    else:
        config = default_config(args.preset)
    return apply_overrides(config, args.overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load(args)
        if args.command == "run":
            summary = run(config)
            print(f"run finished: status={summary.exit_status} steps={summary.steps}")
            return EXIT_OK if summary.exit_status == "ok" else EXIT_NUMERICAL
        if args.command == "sweep":
            values = [float(v) for v in args.values.split(",") if v.strip()]
            summaries = sweep(config, args.param, values)
            bad = [s for s in summaries if s.exit_status != "ok"]
            print(f"sweep finished: {len(summaries) - len(bad)}/{len(summaries)} runs ok")
            return EXIT_OK
        if args.command == "mms":
            config.preset = "mms"
            summary = run(config)
            print(json.dumps(summary.order_report, sort_keys=True, indent=2))
            return EXIT_OK
        if args.command == "validate-h":
            report = validate_h_config(config)
            print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
            return EXIT_OK
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PositivityError, NewtonDivergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
