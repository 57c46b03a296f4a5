"""Command-line entry point.

``besovlab run <experiment> [--config FILE] [--set key=value]... [--out DIR] [--quick]``
``besovlab list``

Exit status: 0 when every check passes, 1 when some check fails, 2 on a
configuration or usage error.
"""
from __future__ import annotations

import argparse
import os
import sys

from ..errors import BesovLabError, ConfigError, ReportIOError, UsageError
from .config import EXPERIMENTS, PARAMS, parse_config
from .experiments import CLAIMS, run_experiment
from .report import write_report

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
OUT_ENV = "BESOVLAB_OUT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    ap = _Parser(prog="besovlab", description="Besov-space norm inflation experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment", help="experiment name (see `besovlab list`)")
    run.add_argument("--config", help="file of key=value lines")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                     help="override one parameter (repeatable)")
    run.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./results)")
    run.add_argument("--quick", action="store_true", help="reduced sweeps")
    sub.add_parser("list", help="list experiments and their parameters")
    return ap


def _list(stream):
    for name in EXPERIMENTS:
        print(f"{name}: {CLAIMS[name]}", file=stream)
        for key, (kind, default, doc) in PARAMS[name].items():
            print(f"    {key} ({kind}, default {default}): {doc}", file=stream)


def main(argv=None):
    out, err = sys.stdout, sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command == "list":
            _list(out)
            return EXIT_PASS
        text = ""
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
        cfg = parse_config(text, args.overrides, experiment=args.experiment, quick=args.quick, out=args.out)
        out_dir = cfg.out or os.environ.get(OUT_ENV) or "results"
        report = run_experiment(cfg)
        json_path, csv_path = write_report(report, out_dir)
    except (ConfigError, UsageError) as exc:
        print(f"besovlab: error: {exc}", file=err)
        return EXIT_USAGE
    except ReportIOError as exc:
        print(f"besovlab: error: {exc}", file=err)
        return EXIT_FAIL
    except BesovLabError as exc:
        print(f"besovlab: {type(exc).__name__}: {exc}", file=err)
        return EXIT_FAIL
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.rule}" + (f"  [{c.detail}]" if c.detail else ""), file=out)
    print(f"{cfg.experiment}: {'PASS' if report.passed else 'FAIL'} "
          f"({report.timings['wall_seconds']:.1f} s) -> {csv_path}, {json_path}", file=out)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
