#!/usr/bin/env python3
"""Reconstruction probabilities under the fixed PSI >= 0.25 rule.

Estimates P(PSI >= 0.25) across sample sizes for the no-shift and the
moderate-shift (J = 0.1) populations, for B = 5 and B = 10 categories.
"""

import argparse
from pathlib import Path

from popres.reporting import run_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results", type=Path)
    ap.add_argument("--replications", default=100_000, type=int)
    ap.add_argument("--seed", default=0, type=int)
    ap.add_argument("--workers", default=1, type=int)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for B in (5, 10):
        for target_j in (0.0, 0.1):
            tag = f"B{B}_j{target_j:g}"
            out = run_study(
                "table1",
                {
                    "B": B,
                    "n_grid": [50, 100, 200, 500],
                    "replications": args.replications,
                    "seed": args.seed,
                    "target_j": target_j,
                    "workers": args.workers,
                },
                args.out_dir / f"reconstruction_{tag}.csv",
            )
            print(f"wrote {out}")


if __name__ == "__main__":
    main()
