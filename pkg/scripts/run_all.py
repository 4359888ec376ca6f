#!/usr/bin/env python3
"""Run every registered experiment and collect reports in one directory.

Usage: python scripts/run_all.py [OUT_DIR] [--trials N] [--seed S]
"""

import argparse
import sys
import time

from wavelab.config import ExperimentConfig
from wavelab.experiments import experiment_names, run_experiment


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", nargs="?", default="out/full_run")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    failures = []
    for name in experiment_names():
        cfg = ExperimentConfig(
            experiment=name, trials=args.trials, seed=args.seed, out_dir=args.out_dir
        )
        t0 = time.perf_counter()
        rep = run_experiment(cfg)
        rep.write(cfg.out_dir, cfg.fmt)
        status = "PASS" if rep.all_passed else "FAIL"
        print(f"{name:24s} {status} {time.perf_counter() - t0:6.1f}s")
        if not rep.all_passed:
            failures.append(name)
    if failures:
        print("failing:", ", ".join(failures))
        return 1
    print(f"all experiments passed; reports in {args.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
