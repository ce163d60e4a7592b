"""Mean regret reduction of the predictive variants against the baseline for several horizons.

Used to see how the curtailment comparison depends on T:

    python scripts/horizon_sweep.py --scenario curtailment --epsilon 0.01 --rounds 200 400 1000
"""

import argparse
from dataclasses import replace

import numpy as np

from poco.config import DEFAULTS
from poco.experiment import run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default="curtailment", choices=sorted(DEFAULTS))
    ap.add_argument("--epsilon", type=float, default=0.01)
    ap.add_argument("--rounds", type=int, nargs="+", default=[200, 400, 600, 800, 1000])
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    base = replace(DEFAULTS[args.scenario], epsilons=(args.epsilon,), include_omd=False)
    for T in args.rounds:
        red = {}
        for seed in range(args.seeds):
            s = run_experiment(replace(base, T=T, seed=seed)).summary
            for name, a in s["algorithms"].items():
                if a["kind"] in ("fixed", "backtracking"):
                    red.setdefault(name, []).append(a["reduction_vs_baseline"])
        for name, r in red.items():
            r = np.array(r)
            print(f"T={T:5d} {name:18s} mean {r.mean():+.3f} min {r.min():+.3f} max {r.max():+.3f}")


if __name__ == "__main__":
    main()
