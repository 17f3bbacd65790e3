#!/usr/bin/env python3
"""Plot CSV output of the wtdp CLI.

Usage:
    plot_results.py simulate.csv [analyze.csv ...] -o out.png

Any mix of `simulate` and `analyze` CSVs sharing one sweep axis can be
overlaid; simulated success rates get binomial error bars, analytical curves
are drawn as lines.
"""
import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        sys.exit(f"{path}: empty CSV")
    kind = "analyze" if "q_star" in rows[0] else "simulate"
    return kind, rows


def fnum(row, key):
    v = row.get(key, "")
    return float(v) if v not in ("", None) else float("nan")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csvs", nargs="+", help="CSV files from the wtdp CLI")
    ap.add_argument("-o", "--out", default="results.png", help="output image")
    ap.add_argument("--logx", action="store_true", help="log-scale sweep axis")
    args = ap.parse_args()

    fig, (ax_p, ax_t) = plt.subplots(1, 2, figsize=(11, 4.2))
    axis_name = None
    for path in args.csvs:
        kind, rows = load(path)
        axis_name = axis_name or rows[0]["axis"]
        x = [fnum(r, "value") for r in rows]
        label = path.rsplit("/", 1)[-1].removesuffix(".csv")
        if kind == "analyze":
            ax_p.plot(x, [fnum(r, "q_star") for r in rows], "-", label=f"{label} (model)")
            ax_t.plot(x, [fnum(r, "e_t_star") for r in rows], "-",
                      label=f"{label} E[T] (model)")
            ax_t.plot(x, [fnum(r, "e_t_suc_star") for r in rows], "--",
                      label=f"{label} E[T|success] (model)")
        else:
            ax_p.errorbar(x, [fnum(r, "nd_success") for r in rows],
                          yerr=[fnum(r, "nd_success_se") for r in rows],
                          marker="o", linestyle=":", label=f"{label} ND")
            if any(r.get("inaug_success") for r in rows):
                ax_p.errorbar(x, [fnum(r, "inaug_success") for r in rows],
                              yerr=[fnum(r, "inaug_success_se") for r in rows],
                              marker="s", linestyle=":", label=f"{label} inauguration")
            ax_t.plot(x, [fnum(r, "mean_nd_time") for r in rows], "o:",
                      label=f"{label} ND time")
            if any(r.get("mean_inaug_time") for r in rows):
                ax_t.plot(x, [fnum(r, "mean_inaug_time") for r in rows], "s:",
                          label=f"{label} inauguration time")
            ax_t.plot(x, [fnum(r, "t_first_nd_wald") for r in rows], "^:",
                      label=f"{label} time to first success")
    for ax, ylab in ((ax_p, "success probability"), (ax_t, "slots")):
        ax.set_xlabel(axis_name)
        ax.set_ylabel(ylab)
        ax.grid(True, alpha=0.3)
        if args.logx:
            ax.set_xscale("log")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.out, dpi=140)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
