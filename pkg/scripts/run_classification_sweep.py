#!/usr/bin/env python3
"""Classification probabilities across a grid of blockwise deviations.

Sweeps the deviation delta_v from zero to (3M+2) * delta and records the
empirical probability of each PRS decision region.
"""

import argparse
from pathlib import Path

from popres.reporting import run_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path("results/sweep.csv"), type=Path)
    ap.add_argument("--n", default=50, type=int)
    ap.add_argument("--B", default=5, type=int)
    ap.add_argument("--c", default=0.7, type=float)
    ap.add_argument("--M", default=2.0, type=float)
    ap.add_argument("--alpha1", default=0.05, type=float)
    ap.add_argument("--alpha2", default=0.10, type=float)
    ap.add_argument("--grid-points", default=30, type=int)
    ap.add_argument("--replications", default=100_000, type=int)
    ap.add_argument("--seed", default=0, type=int)
    ap.add_argument("--workers", default=1, type=int)
    args = ap.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)

    out = run_study(
        "sweep",
        {
            "n": args.n,
            "B": args.B,
            "c": args.c,
            "M": args.M,
            "alpha1": args.alpha1,
            "alpha2": args.alpha2,
            "grid_points": args.grid_points,
            "replications": args.replications,
            "seed": args.seed,
            "workers": args.workers,
        },
        args.out,
    )
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
