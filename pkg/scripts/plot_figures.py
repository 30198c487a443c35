#!/usr/bin/env python3
"""Histogram the eigenvalue CSVs produced by reproduce_figures.py.

Reads every *.csv under the data directory and writes one PNG per file with
a histogram of all eigenvalues pooled across samples.
"""

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from repint.io import read_eigenvalue_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", type=str, default="figures_data")
    parser.add_argument("--bins", type=int, default=60)
    args = parser.parse_args()

    data_dir = Path(args.data_dir)
    csvs = sorted(data_dir.glob("*.csv"))
    if not csvs:
        print(f"no CSV files under {data_dir}/", file=sys.stderr)
        return 1
    for path in csvs:
        values = [x for row in read_eigenvalue_csv(path) for x in row]
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.hist(values, bins=args.bins, range=(0.0, 1.0), density=True, color="#4477aa")
        ax.set_xlabel("eigenvalue")
        ax.set_ylabel("density")
        ax.set_title(path.stem, fontsize=9)
        fig.tight_layout()
        fig.savefig(path.with_suffix(".png"), dpi=150)
        plt.close(fig)
        print(f"{path.with_suffix('.png')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
