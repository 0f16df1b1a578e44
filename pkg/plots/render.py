#!/usr/bin/env python3
"""Render the solver's CSV artifacts into figures.

Three figure kinds, matching the delimited outputs of the speccert CLI:

  pseudo-contour    gamma-grid CSV (re, im, gamma) -> sublevel contours at
                    the requested eps levels
  convergence       one or more points.csv (re, im, error_bound), one per
                    resolution n -> spectrum locations with error bars vs n
  discrete-overlay  discrete.csv + esscover.csv -> essential-spectrum
                    squares with discrete points and their error circles

The figure layer has no numerical authority: contours come from the
emitted grid, never from re-running the solver. Renders headlessly.

Usage:
  render.py --kind pseudo-contour --in grid.csv --eps 0.5,0.25 --out fig.png
  render.py --kind convergence --in points_n20.csv points_n40.csv \\
            --labels 20,40 --out fig.png
  render.py --kind discrete-overlay --in discrete.csv esscover.csv --out fig.png
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle, Rectangle


def read_csv_columns(path, expected):
    try:
        with open(path) as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        raise SystemExit(f"render: cannot read {path}: {exc}")
    if not rows or rows[0] != expected:
        raise SystemExit(
            f"render: {path} must carry header {expected}, got {rows[0] if rows else 'nothing'}"
        )
    cols = {name: [] for name in expected}
    for rec in rows[1:]:
        if len(rec) < len(expected):
            raise SystemExit(f"render: short row in {path}: {rec}")
        for name, val in zip(expected, rec):
            cols[name].append(val)
    return cols


def floats(values):
    try:
        return np.array([float(v) for v in values])
    except ValueError as exc:
        raise SystemExit(f"render: non-numeric value in CSV: {exc}")


def render_pseudo_contour(inputs, eps_levels, out, title=None):
    if len(inputs) != 1:
        raise SystemExit("pseudo-contour takes exactly one grid CSV")
    cols = read_csv_columns(inputs[0], ["re", "im", "gamma"])
    re = floats(cols["re"])
    im = floats(cols["im"])
    gamma = floats(cols["gamma"])
    xs, ys = np.unique(re), np.unique(im)
    if xs.size < 2 or ys.size < 2:
        raise SystemExit("pseudo-contour needs a 2-d grid (use --full-grid)")
    grid = np.full((ys.size, xs.size), np.nan)
    xi = np.searchsorted(xs, re)
    yi = np.searchsorted(ys, im)
    grid[yi, xi] = gamma
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    filled = ax.contourf(
        xs, ys, np.log10(grid), levels=24, cmap="viridis"
    )
    levels = sorted(eps_levels)
    lines = ax.contour(xs, ys, grid, levels=levels, colors="white",
                       linewidths=1.2)
    ax.clabel(lines, fontsize=8, fmt="%.3g")
    fig.colorbar(filled, ax=ax, label=r"$\log_{10}\,\gamma_n(z)$")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title or "pseudospectrum sublevel contours")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return lines


def render_convergence(inputs, labels, out, title=None):
    if not inputs:
        raise SystemExit("convergence needs at least one points CSV")
    if labels and len(labels) != len(inputs):
        raise SystemExit("--labels must match the number of input files")
    fig, ax = plt.subplots(figsize=(6.4, 4.6))
    for idx, path in enumerate(inputs):
        cols = read_csv_columns(path, ["re", "im", "error_bound"])
        re = floats(cols["re"])
        bound = floats(cols["error_bound"])
        n_label = labels[idx] if labels else str(idx + 1)
        x = np.full(re.size, float(n_label))
        ax.errorbar(x, re, yerr=bound, fmt="o", ms=3.5, capsize=2.5,
                    lw=0.9, label=f"n = {n_label}")
    ax.set_xlabel("grid resolution n")
    ax.set_ylabel("certified spectrum points (Re z)")
    ax.set_title(title or "spectrum approximations with error bounds")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def render_discrete_overlay(inputs, out, title=None):
    if len(inputs) != 2:
        raise SystemExit("discrete-overlay takes discrete.csv and esscover.csv")
    pts = read_csv_columns(inputs[0], ["re", "im", "error_bound", "multiplicity"])
    cover = read_csv_columns(inputs[1], ["center_re", "center_im", "half_width"])
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    half = None
    for cx, cy, hw in zip(
        floats(cover["center_re"]), floats(cover["center_im"]),
        floats(cover["half_width"]),
    ):
        half = hw
        ax.add_patch(Rectangle((cx - hw, cy - hw), 2 * hw, 2 * hw,
                               facecolor="#b0c4de", edgecolor="none",
                               alpha=0.8, zorder=1))
    pre = floats(pts["re"])
    pim = floats(pts["im"])
    rad = floats(pts["error_bound"])
    for x, y, r in zip(pre, pim, rad):
        ax.add_patch(Circle((x, y), r, facecolor="none", edgecolor="crimson",
                            lw=1.0, zorder=3))
    ax.plot(pre, pim, "x", color="crimson", ms=6, zorder=4,
            label="discrete spectrum (error circles)")
    if half is not None:
        ax.plot([], [], "s", color="#b0c4de", ms=8,
                label="essential-spectrum cover")
    ax.legend(loc="upper left", fontsize=8)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_title(title or "discrete spectrum vs essential-spectrum cover")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True,
                        choices=["pseudo-contour", "convergence",
                                 "discrete-overlay"])
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--eps", help="comma list of contour levels")
    parser.add_argument("--labels", help="comma list of n labels")
    parser.add_argument("--title")
    args = parser.parse_args(argv)

    if args.kind == "pseudo-contour":
        if not args.eps:
            raise SystemExit("pseudo-contour needs --eps levels")
        levels = [float(v) for v in args.eps.split(",")]
        render_pseudo_contour(args.inputs, levels, args.out, args.title)
    elif args.kind == "convergence":
        labels = args.labels.split(",") if args.labels else None
        render_convergence(args.inputs, labels, args.out, args.title)
    else:
        render_discrete_overlay(args.inputs, args.out, args.title)
    return 0


if __name__ == "__main__":
    sys.exit(main())
