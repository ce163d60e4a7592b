"""Final regret and predictive-update fraction over an epsilon sweep, several seeds.

    python scripts/epsilon_sweep.py --scenario regulation --seeds 5
"""

import argparse
import csv
import sys
from dataclasses import replace

from poco.config import DEFAULTS, load_config
from poco.experiment import run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default="regulation", choices=sorted(DEFAULTS))
    ap.add_argument("--config")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--rounds", type=int)
    ap.add_argument("--epsilon", type=float, action="append")
    args = ap.parse_args()

    cfg = load_config(args.config, args.scenario) if args.config else DEFAULTS[args.scenario]
    if args.rounds:
        cfg = replace(cfg, T=args.rounds)
    if args.epsilon:
        cfg = replace(cfg, epsilons=tuple(args.epsilon))

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["seed", "algorithm", "epsilon", "final_regret", "reduction", "nu"])
    for seed in range(args.seeds):
        summary = run_experiment(replace(cfg, seed=seed)).summary
        for name, a in summary["algorithms"].items():
            w.writerow([seed, name, a["epsilon"], f"{a['final_regret']:.6g}",
                        f"{a['reduction_vs_baseline']:.4f}", a.get("nu", "")])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
