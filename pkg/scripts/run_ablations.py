#!/usr/bin/env python3
"""Component ablations on an instance set.

Two studies:
  init      gap-aware greedy initialization vs the cost-only baseline,
            full runs, with a per-instance rank-sum verdict and a
            win-draw-loss summary
  operators guided vs traditional local-search operators, reporting
            evaluation counts, wall-clock, and their ratios
"""

import argparse
import csv
from pathlib import Path

from carptdsc import ExperimentConfig, ablation_timing, compare_experiments


def ablate_init(cfg, out):
    base_cfg = ExperimentConfig(**{**cfg.__dict__, "init_mode": "baseline"})
    guided, plain = compare_experiments(cfg, base_cfg)
    guided.write(out, "csv", prefix="init_kgis")
    plain.write(out, "csv", prefix="init_baseline")
    for row in guided.rows:
        print(row)
    print("w-d-l:", guided.wdl)


def ablate_operators(cfg, out):
    rows = ablation_timing(cfg)
    path = out / "operator_ablation.csv"
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(row)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("study", choices=("init", "operators"))
    ap.add_argument("instances", nargs="+")
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--generations", type=int, default=50)
    ap.add_argument("--out", default="out/ablation")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        instances=args.instances,
        repetitions=args.reps,
        generations=args.generations,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.study == "init":
        ablate_init(cfg, out)
    else:
        ablate_operators(cfg, out)


if __name__ == "__main__":
    main()
