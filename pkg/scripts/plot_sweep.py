#!/usr/bin/env python3
"""Plot missed-opportunity curves from one or more sweep CSV files.

Usage: python scripts/plot_sweep.py sweep.csv [more.csv ...] [-o out.png]
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

STYLES = {"llr": "k-o", "gllr": "g-^", "qm": "r-s", "lm": "b-d"}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv_paths", nargs="+")
    parser.add_argument("-o", "--output", default="sweep.png")
    args = parser.parse_args()

    curves: dict[str, list[tuple[float, float]]] = defaultdict(list)
    for path in args.csv_paths:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                curves[row["statistic"]].append(
                    (float(row["alpha"]), float(row["p_mo_mean"]))
                )

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for name, points in sorted(curves.items()):
        points.sort()
        alphas, p_mo = zip(*points)
        ax.loglog(alphas, p_mo, STYLES.get(name, "-x"), label=name.upper(), ms=4)
    ax.set_xlabel(r"$\alpha = \sigma_{SH}^2 / \sigma_0^2$")
    ax.set_ylabel("average missed-opportunity probability")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
