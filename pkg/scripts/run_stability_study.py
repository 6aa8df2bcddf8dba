#!/usr/bin/env python3
"""Mean and variance stability ratios of n*PSI and n*PRS under no shift."""

import argparse
from pathlib import Path

from popres.reporting import run_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path("results/stability.csv"), type=Path)
    ap.add_argument("--B", default=5, type=int)
    ap.add_argument("--replications", default=100_000, type=int)
    ap.add_argument("--seed", default=0, type=int)
    ap.add_argument("--workers", default=1, type=int)
    args = ap.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)

    out = run_study(
        "stability",
        {
            "B": args.B,
            "n_grid": [20, 30, 50, 75, 100, 150, 200, 300, 500, 750, 1000],
            "replications": args.replications,
            "seed": args.seed,
            "workers": args.workers,
        },
        args.out,
    )
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
