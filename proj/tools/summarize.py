#!/usr/bin/env python3
"""Summarize or plot CSV output from the kfrac CLI.

Detects which subcommand produced the file from its header:

  solve  (t,z,x_weighted,x,residual)          -> trajectory stats, optional plot
  sweep  (alpha,beta,mu,m,m_star,...)         -> classification table
  audit  (T,theta,quantity,value)             -> per-horizon quantity table

Usage:
  kfrac solve --matched --out run.csv && tools/summarize.py run.csv
  kfrac sweep --out sweep.csv && tools/summarize.py sweep.csv
  tools/summarize.py run.csv --plot run.png
"""

import argparse
import csv
import math
import sys
from collections import defaultdict


def read_rows(path):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        return reader.fieldnames or [], list(reader)


def num(s):
    if s in ("", None):
        return math.nan
    return float(s)


def summarize_solve(rows, plot_path):
    t = [num(r["t"]) for r in rows]
    x = [num(r["x"]) for r in rows]
    xw = [num(r["x_weighted"]) for r in rows]
    res = [num(r["residual"]) for r in rows]
    finite = [v for v in x[1:] if math.isfinite(v)]
    print(f"nodes: {len(rows)}  span: [{t[0]:g}, {t[-1]:g}]")
    if finite:
        print(f"x range (interior): [{min(finite):.6g}, {max(finite):.6g}]")
    print(f"max integral-equation residual: {max(res):.3e}")
    drop = len(x) - 1 - len(finite)
    if drop > 0:
        print(f"note: {drop} non-finite interior sample(s) -- truncated run")
    if plot_path:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.plot(t[1:], x[1:], label="x(t)")
        ax.plot(t, xw, "--", label="weighted samples")
        ax.set_xlabel("t")
        ax.legend()
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(plot_path, dpi=130)
        print(f"wrote {plot_path}")


def summarize_sweep(rows, plot_path):
    counts = defaultdict(int)
    print(f"{'alpha':>6} {'mu':>5} {'m':>7} {'m/m*':>6}  {'classification':<15} {'t_blow':>9}")
    for r in rows:
        m, mstar = num(r["m"]), num(r["m_star"])
        ratio = m / mstar if math.isfinite(m) and math.isfinite(mstar) else math.nan
        tb = r.get("t_blow_estimate", "")
        counts[r["classification"]] += 1
        print(
            f"{num(r['alpha']):>6.2f} {num(r['mu']):>5.2f} "
            f"{m:>7.3f} {ratio:>6.2f}  {r['classification']:<15} "
            f"{num(tb) if tb else float('nan'):>9.3g}"
        )
    print("totals:", dict(sorted(counts.items())))
    if plot_path:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        marker = {"blowup": "x", "global_tracked": "o", "error": "s",
                  "inconclusive": "d"}
        fig, ax = plt.subplots(figsize=(6.5, 4.5))
        for cls in sorted({r["classification"] for r in rows}):
            xs = [num(r["m"]) / num(r["m_star"]) for r in rows
                  if r["classification"] == cls and r["m_star"]]
            ys = [num(r["alpha"]) + 0.02 * num(r["mu"]) for r in rows
                  if r["classification"] == cls and r["m_star"]]
            ax.scatter(xs, ys, marker=marker.get(cls, "."), label=cls)
        ax.axvline(1.0, color="k", lw=0.8)
        ax.set_xlabel("m / m*")
        ax.set_ylabel("alpha (mu offset)")
        ax.legend()
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(plot_path, dpi=130)
        print(f"wrote {plot_path}")


def summarize_audit(rows, plot_path):
    by_T = defaultdict(dict)
    for r in rows:
        by_T[num(r["T"])][r["quantity"]] = num(r["value"])
    quantities = ["lhs", "rhs", "pivot", "tail_bound", "young_ok", "directions_ok"]
    print(f"{'T':>8} " + " ".join(f"{q:>14}" for q in quantities))
    for T in sorted(by_T):
        vals = by_T[T]
        print(f"{T:>8g} " + " ".join(f"{vals.get(q, math.nan):>14.6g}"
                                     for q in quantities))
    bounds = [by_T[T].get("tail_bound", math.nan) for T in sorted(by_T)]
    if len(bounds) > 1 and all(b == bounds[0] for b in bounds):
        print("tail bound is horizon-independent (borderline decay)")
    elif all(x > y for x, y in zip(bounds, bounds[1:])):
        print("tail bound decreases with the horizon")
    if plot_path:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        Ts = sorted(by_T)
        fig, ax = plt.subplots(figsize=(6.5, 4.5))
        for q in ("lhs", "rhs", "pivot", "tail_bound"):
            ax.loglog(Ts, [by_T[T].get(q, math.nan) for T in Ts], "o-", label=q)
        ax.set_xlabel("horizon T")
        ax.legend()
        ax.grid(alpha=0.3, which="both")
        fig.tight_layout()
        fig.savefig(plot_path, dpi=130)
        print(f"wrote {plot_path}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv_path")
    ap.add_argument("--plot", metavar="PNG", help="also write a plot")
    args = ap.parse_args()

    header, rows = read_rows(args.csv_path)
    if not rows:
        print("no data rows", file=sys.stderr)
        return 1
    if header[:3] == ["t", "z", "x_weighted"]:
        summarize_solve(rows, args.plot)
    elif header[:2] == ["alpha", "beta"]:
        summarize_sweep(rows, args.plot)
    elif header[:2] == ["T", "theta"]:
        summarize_audit(rows, args.plot)
    else:
        print(f"unrecognized header: {','.join(header)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
