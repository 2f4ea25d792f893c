"""Command-line entry point: ``pertdet {evolve,alpha,norms,verify,gate}``."""

from __future__ import annotations

import argparse
import dataclasses
import inspect
import math
import sys
from pathlib import Path

from . import checks
from .errors import BlowUpError, ConfigurationError, DivergenceError, DomainError
from .experiments import (Report, ReportRow, ScenarioConfig, load_config, run_scenario,
                          write_report)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3

# accepted scenario kinds per subcommand; the first is the default
_KINDS_FOR = {"evolve": ("conserve", "fallacy"), "alpha": ("alpha",), "norms": ("norms",),
              "gate": ("gate",)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pertdet", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML scenario file")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="random seed override")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="evolve and monitor α drift")
    sub.add_parser("alpha", parents=[common], help="evaluate α at the configured κ")
    sub.add_parser("norms", parents=[common], help="evaluate the configured norms")
    sub.add_parser("gate", parents=[common], help="report the admissible κ thresholds")
    verify = sub.add_parser("verify", parents=[common], help="run a property suite")
    verify.add_argument("--suite", required=True, choices=sorted(checks.SUITES))
    return parser


def _scenario_config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig(name=f"default-{args.command}")
    allowed = _KINDS_FOR[args.command]
    if cfg.kind is None:
        cfg = dataclasses.replace(cfg, kind=allowed[0])
    elif cfg.kind not in allowed:
        raise ConfigurationError(
            f"scenario.kind = {cfg.kind!r} cannot run under '{args.command}' (expects {allowed})")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol is not None:
        if not args.tol > 0:
            raise ConfigurationError(f"--tol must be positive, got {args.tol}")
        if args.command == "alpha":
            cfg.series_tol = args.tol
        else:
            cfg.drift_tol = args.tol
    return cfg


def _call_check(fn, args):
    params = inspect.signature(fn).parameters
    kwargs = {}
    if args.seed is not None and "seed" in params:
        kwargs["seed"] = args.seed
    if args.tol is not None and "tol" in params:
        kwargs["tol"] = args.tol
    return fn(**kwargs)


def _verify(args) -> int:
    if args.config is not None:
        raise ConfigurationError("verify runs fixed suites and takes no --config")
    if args.tol is not None and not args.tol > 0:
        raise ConfigurationError(f"--tol must be positive, got {args.tol}")
    name = f"verify-{args.suite}"
    report = Report(name)
    for fn in checks.SUITES[args.suite]:
        res = _call_check(fn, args)
        print(res.line())
        report.check(res.name, res.passed, res.measured, res.threshold,
                     seconds=res.seconds, details=res.details)
        for row in res.rows:
            report.rows.append(ReportRow(
                res.name, row.get("t", math.nan), row.get("kappa", row.get("kappa0", math.nan)),
                row.get("alpha", math.nan), row.get("hs", math.nan), row.get("leading", math.nan),
                row.get("drift", math.nan)))
    write_report(report, args.out or Path("out"))
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return _verify(args)
        cfg = _scenario_config(args)
        report = run_scenario(cfg)
        csv_path, json_path = write_report(report, args.out or Path(cfg.out_dir))
        for name, a in report.assertions.items():
            print(f"[{'PASS' if a['passed'] else 'FAIL'}] {name}: measured={a['measured']} "
                  f"threshold={a['threshold']}")
        print(f"wrote {csv_path} and {json_path}")
        return EXIT_OK if report.passed else EXIT_FAIL
    except (ConfigurationError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, DivergenceError) as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
