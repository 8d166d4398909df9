#!/usr/bin/env python3
"""Render molekom result CSVs as PNG figures.

    python3 scripts/plot.py results/fig1b.csv [more.csv ...]

Writes <name>.png next to each CSV. Needs pandas and matplotlib.
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def mobility_label(row):
    return f"D_tx={row['D_tx']:g}, D_rx={row['D_rx']:g}"


def fig1a(df, ax):
    for (dtx, drx, q, slot), g in df.groupby(["D_tx", "D_rx", "Q", "slot"]):
        ax.plot(g["P_FA"], g["P_D"], label=f"D={dtx:g}/{drx:g}, Q={q}, j={slot}")
    ax.set(xlabel="P_FA", ylabel="P_D", xscale="log")


def fig1b(df, ax):
    for (dtx, drx), g in df.groupby(["D_tx", "D_rx"]):
        line, = ax.plot(g["sigma2_o"], g["Pe_analytic"], label=f"D={dtx:g}/{drx:g}")
        if g["Pe_mc"].notna().any():
            ax.errorbar(g["sigma2_o"], g["Pe_mc"], yerr=g["mc_stderr"], fmt="o", color=line.get_color(), ms=3)
    ax.set(xlabel="sigma_o^2", ylabel="P_e", yscale="log")


def fig1c(df, ax):
    for (dtx, k), g in df.groupby(["D_tx", "k"]):
        ax.plot(g["sigma2_o"], g["capacity"], marker="o", label=f"D={dtx:g}, k={k}")
    ax.set(xlabel="sigma_o^2", ylabel="capacity (bits/slot)")


def fig2(df, ax):
    curves = df[df["kind"] == "curve"]
    for (dtx, s2), g in curves.groupby(["D_tx", "sigma2_o"]):
        ax.plot(g["Q1"], g["Pe"], label=f"D={dtx:g}, sigma_o^2={s2:g}")
    best = df[df["kind"] == "argmin"]
    ax.plot(best["Q1"], best["Pe"], "k*", ms=8, label="argmin")
    ax.set(xlabel="Q[1]", ylabel="P_e", yscale="log")


def validate_q(df, ax):
    ax.errorbar(df["offset"], df["q_dt"], yerr=3 * df["stderr_dt"], fmt="o", label="walk dt")
    ax.errorbar(df["offset"] + 0.1, df["q_fine"], yerr=3 * df["stderr_fine"], fmt="s", label="walk dt/refine")
    ax.plot(df["offset"], df["q_analytic"], "kx", label="quadrature")
    ax.set(xlabel="offset", ylabel="q", yscale="log")


PLOTTERS = {
    "fig1a": fig1a,
    "fig1b": fig1b,
    "fig1c": fig1c,
    "fig2a": fig2,
    "fig2b": fig2,
    "validate-q": validate_q,
}


def main(paths):
    for path in map(Path, paths):
        name = path.stem
        plot = PLOTTERS.get(name)
        if plot is None:
            print(f"{path}: no plot for experiment {name}", file=sys.stderr)
            continue
        df = pd.read_csv(path, comment="#")
        fig, ax = plt.subplots(figsize=(6, 4.5))
        plot(df, ax)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        out = path.with_suffix(".png")
        fig.savefig(out, dpi=120)
        print(out)


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    main(sys.argv[1:])
