"""Tabulate lambda, its derivative, alpha1 and the CD weight per Trotter step, with regime labels.

Handy for seeing why an angle cutoff keeps or drops the CD layers of a given instance.
"""
import argparse

import numpy as np

from dcqo.cli import ExperimentConfig, load_problem
from dcqo.schedule import Schedule, cd_profile, classify_regimes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--source", choices=["random", "csv"], default="random")
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--T", type=float, default=0.7)
    ap.add_argument("--dt", type=float, default=0.1)
    ap.add_argument("--cutoff", type=float, default=0.1)
    args = ap.parse_args()

    sg, prov, _, _ = load_problem(ExperimentConfig(source=args.source, n=args.n, seed=args.seed))
    prof = cd_profile(sg, Schedule(args.T, args.dt))
    print(prof.to_csv(), end="")
    print("regimes:", " ".join(classify_regimes(prof)))
    # largest single-gate CD angle per step: 2 dt |g| max(|h|, |J|)
    scale = max(np.abs(sg.h).max(), np.abs(sg.J).max())
    angles = 2 * args.dt * np.abs(prof.cd_strength) * scale
    print("max CD angle per step:", " ".join(f"{a:.4f}" for a in angles))
    print(f"steps with any angle above {args.cutoff}: {int((angles >= args.cutoff).sum())}")


if __name__ == "__main__":
    main()
