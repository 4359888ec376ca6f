"""Command-line surface: wavelab run | list | describe.

Exit codes: 0 all verdicts pass, 1 verdict failure, 2 usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ExperimentConfig, build_config, parse_config_file
from .experiments import REGISTRY, experiment_names, run_experiment
from .nlw import NumericalFailureError, PicardNoContractionError


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavelab", description=__doc__)
    sub = p.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run one experiment and persist its report")
    run.add_argument("--experiment", required=True)
    run.add_argument("--config", help="key=value config file with [main]/[tolerances] sections")
    run.add_argument("--m", type=float)
    run.add_argument("--iota", type=int, choices=(1, -1))
    run.add_argument("--grid-h", type=float, dest="grid_h")
    run.add_argument("--grid-radius", type=float, dest="grid_radius")
    run.add_argument("--t-final", type=float, dest="t_final")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out", dest="out_dir")
    run.add_argument("--format", dest="fmt", choices=("csv", "json", "both"))
    run.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")

    sub.add_parser("list", help="print the experiment catalog")

    desc = sub.add_parser("describe", help="print one experiment's parameter sheet")
    desc.add_argument("name")
    return p


def _cmd_run(args) -> int:
    file_values = parse_config_file(args.config) if args.config else None
    overrides = {
        k: getattr(args, k)
        for k in ("experiment", "m", "iota", "grid_h", "grid_radius", "t_final", "trials", "seed", "workers", "out_dir", "fmt")
        if getattr(args, k) is not None
    }
    tols = {}
    for item in args.tol:
        if "=" not in item:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        name, _, val = item.partition("=")
        tols[name.strip()] = float(val)
    overrides["tolerances"] = tols
    cfg = build_config(file_values, overrides)
    if cfg.experiment not in REGISTRY:
        print(f"error: unknown experiment {cfg.experiment!r}", file=sys.stderr)
        return 2
    report = run_experiment(cfg)
    written = report.write(cfg.out_dir, cfg.fmt)
    for path in written:
        print(f"wrote {path}")
    for name, verdict in sorted(report.verdicts.items()):
        mark = "PASS" if verdict.passed else "FAIL"
        print(f"[{mark}] {name}: value={verdict.value:.6g} threshold {verdict.direction} {verdict.threshold:.6g}")
    return 0 if report.all_passed else 1


def _cmd_list() -> int:
    for name in experiment_names():
        print(f"{name:24s} {REGISTRY[name].summary}")
    return 0


def _cmd_describe(name: str) -> int:
    if name not in REGISTRY:
        print(f"error: unknown experiment {name!r}", file=sys.stderr)
        return 2
    spec = REGISTRY[name]
    defaults = ExperimentConfig(experiment=name)
    print(f"experiment: {spec.name}")
    print(f"summary:    {spec.summary}")
    print(f"checks:     {spec.reference}")
    print("defaults:")
    for key, val in defaults.as_dict().items():
        if key in ("experiment", "tolerances"):
            continue
        print(f"  {key} = {val}")
    print("  tolerances = {} (override with --tol NAME=VALUE)")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list":
            return _cmd_list()
        if args.command == "describe":
            return _cmd_describe(args.name)
        parser.print_help()
        return 2
    except (ConfigError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailureError, PicardNoContractionError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
