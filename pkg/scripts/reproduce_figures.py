#!/usr/bin/env python3
"""Generate the eigenvalue-distribution datasets for both random-state ensembles.

Asymptotic-ensemble sets (d, environment spectrum b):
    (2, [1,0])  (2, [3/4,1/4])  (2, [1,0,0,0])
    (3, [1,0,0])  (3, [3/4,1/8,1/8])  (3, [1,0,0,0,0])
Induced-ensemble sets (d, d'):
    (2,2)  (3,3)  (3,5)

One CSV (plus manifest) per set, written through the repint CLI so the files
carry the standard format.  Histograms can then be rendered with
plot_figures.py.
"""

import argparse
import sys
from pathlib import Path

from repint.cli import main as repint_main

ASYMPTOTIC_SETS = [
    (2, "1,0"),
    (2, "3/4,1/4"),
    (2, "1,0,0,0"),
    (3, "1,0,0"),
    (3, "3/4,1/8,1/8"),
    (3, "1,0,0,0,0"),
]
INDUCED_SETS = [(2, 2), (3, 3), (3, 5)]


def slug(text):
    return text.replace(",", "-").replace("/", "over")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out-dir", type=str, default="figures_data")
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    common = ["--n-samples", str(args.samples), "--seed", str(args.seed), "--jobs", str(args.jobs)]

    for d, b in ASYMPTOTIC_SETS:
        out = out_dir / f"asymptotic_d{d}_b{slug(b)}.csv"
        rc = repint_main(["sample", "--ensemble", "asymptotic", "--d", str(d), "--b", b,
                          "--out", str(out)] + common)
        if rc != 0:
            return rc
    for d, d_prime in INDUCED_SETS:
        out = out_dir / f"induced_d{d}_dprime{d_prime}.csv"
        rc = repint_main(["sample", "--ensemble", "induced", "--d", str(d),
                          "--d-prime", str(d_prime), "--out", str(out)] + common)
        if rc != 0:
            return rc
    print(f"all 9 datasets written under {out_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
