#!/usr/bin/env python3
"""Render compare.csv (from `inesc compare`) as state and input trajectories."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("-o", "--output", default="compare.png")
    args = ap.parse_args()

    df = pd.read_csv(args.csv)
    n = sum(c.startswith("x_star_") for c in df.columns)
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    for k in range(1, n + 1):
        for ctrl, style in (("baseline", "--"), ("inesc", "-")):
            axes[0].plot(df.t, df[f"{ctrl}_x_{k}"], style, label=f"{ctrl} x{k}")
            axes[1].plot(df.t, df[f"{ctrl}_u_{k}"], style, label=f"{ctrl} u{k}")
        axes[0].axhline(df[f"x_star_{k}"].iloc[0], color="k", lw=0.5)
    axes[0].set_ylabel("x")
    axes[1].set_ylabel("u")
    axes[1].set_xlabel("t [s]")
    axes[0].legend(ncol=2, fontsize=7)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
