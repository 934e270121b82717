#!/usr/bin/env python3
"""Measure wall-clock until each run first reaches a target cost.

Runs stop at the target or after a generation cap (default 600) and are
reported as DNF when the cap is hit first.
"""

import argparse
import csv
from pathlib import Path

from carptdsc import ExperimentConfig, runtime_to_target


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("instances", nargs="+")
    ap.add_argument("--target", action="append", required=True,
                    metavar="NAME:COST", help="target cost, repeatable")
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--max-generations", type=int, default=600)
    ap.add_argument("--out", default="out/time_to_target")
    args = ap.parse_args()

    targets = {}
    for item in args.target:
        name, _, cost = item.partition(":")
        targets[name] = float(cost)

    cfg = ExperimentConfig(
        instances=args.instances,
        repetitions=args.reps,
        target_costs=targets,
    )
    rows = runtime_to_target(cfg, max_generations=args.max_generations)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "time_to_target.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(row)


if __name__ == "__main__":
    main()
