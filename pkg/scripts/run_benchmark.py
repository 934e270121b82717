#!/usr/bin/env python3
"""Run the headline benchmark: 20 independent repetitions of the full
two-stage solver on every instance of a set, reporting Ave(Std), Best,
mean wall-clock, and PDR against reference costs where known.
"""

import argparse
from pathlib import Path

from carptdsc import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("instances", nargs="+", help="instance .dat files")
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--generations", type=int, default=50)
    ap.add_argument("--init", choices=("kgis", "baseline"), default="kgis")
    ap.add_argument("--operators", choices=("kg", "traditional"),
                    default="kg")
    ap.add_argument("--reference", action="append", default=[],
                    metavar="NAME:COST",
                    help="reference cost for PDR, repeatable")
    ap.add_argument("--out", default="out/bench")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    args = ap.parse_args()

    references = {}
    for item in args.reference:
        name, _, cost = item.partition(":")
        references[name] = float(cost)

    cfg = ExperimentConfig(
        instances=args.instances,
        repetitions=args.reps,
        generations=args.generations,
        init_mode=args.init,
        operator_mode=args.operators,
        references=references,
    )
    report = run_experiment(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write(out, args.format, prefix="bench")
    for row in report.rows:
        print(row)


if __name__ == "__main__":
    main()
