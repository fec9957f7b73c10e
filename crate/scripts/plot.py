#!/usr/bin/env python3
"""Plot the CSV tables written by `setmem` into an output directory.

usage: plot.py OUT_DIR [--save]
"""
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt


def read(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def by_algorithm(rows, x, y):
    series = defaultdict(lambda: ([], []))
    for r in rows:
        xs, ys = series[r["algorithm"]]
        xs.append(float(r[x]))
        ys.append(float(r[y]))
    return series


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    out = Path(sys.argv[1])
    save = "--save" in sys.argv[2:]
    figures = []

    if (out / "interference.csv").exists():
        rows = read(out / "interference.csv")
        fig, ax = plt.subplots()
        it = [int(r["iteration"]) for r in rows]
        ax.plot(it, [float(r["v_hat"]) for r in rows], label="tracked")
        ax.plot(it, [float(r["genie_power"]) for r in rows], "--", label="genie")
        ax.set(xlabel="symbol", ylabel="interference power", title="interference tracking")
        ax.legend()
        figures.append(("interference", fig))

    if (out / "sinr.csv").exists():
        fig, ax = plt.subplots()
        for name, (xs, ys) in by_algorithm(read(out / "sinr.csv"), "iteration", "mean_sinr_db").items():
            ax.plot(xs, ys, label=name)
        ax.set(xlabel="symbol", ylabel="SINR (dB)", title="SINR convergence")
        ax.legend()
        figures.append(("sinr", fig))

    if (out / "ber.csv").exists():
        rows = read(out / "ber.csv")
        fig, (ax_ber, ax_ur) = plt.subplots(1, 2, figsize=(10, 4))
        for name, (xs, ys) in by_algorithm(rows, "x_value", "ber").items():
            ax_ber.semilogy(xs, [max(y, 1e-6) for y in ys], marker="o", label=name)
        for name, (xs, ys) in by_algorithm(rows, "x_value", "ur").items():
            ax_ur.plot(xs, ys, marker="o", label=name)
        ax_ber.set(xlabel="x", ylabel="BER")
        ax_ur.set(xlabel="x", ylabel="update rate")
        ax_ber.legend()
        figures.append(("ber", fig))

    if not figures:
        sys.exit(f"no setmem tables in {out}")
    if save:
        for name, fig in figures:
            fig.savefig(out / f"{name}.png", dpi=120)
    else:
        plt.show()


if __name__ == "__main__":
    main()
