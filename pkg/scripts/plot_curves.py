#!/usr/bin/env python3
"""Plot relative-efficiency curves from a sweep CSV.

Reads the long-format output of ``ranksamp simulate`` / ``ranksamp dataset``
(columns p,m,r,lambda,covariate,re,pssr,stderr,reps) and draws one panel per
(m, lambda) or per (m, covariate), with an RE-vs-p curve per stage count r.
matplotlib is only needed by this script, not by the package.

    ranksamp simulate --figures --reps 20000 --seed 7 -o sweep.csv
    python scripts/plot_curves.py sweep.csv --out figures.png
"""

import argparse
import csv
import sys
from collections import defaultdict

LINESTYLES = ["-", "--", ":", "-."]


def read_sweep(path):
    rows = []
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for rec in csv.DictReader(lines):
        if not rec.get("re"):
            continue
        rows.append(
            {
                "p": float(rec["p"]) if rec["p"] else None,
                "m": int(rec["m"]),
                "r": int(rec["r"]),
                "lam": float(rec["lambda"]) if rec["lambda"] else None,
                "covariate": rec["covariate"] or None,
                "re": float(rec["re"]),
            }
        )
    return rows


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("sweep", help="sweep CSV written by the simulate/dataset commands")
    ap.add_argument("--out", default=None, help="image path (default: show interactively)")
    args = ap.parse_args()

    import matplotlib

    if args.out:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_sweep(args.sweep)
    if not rows:
        print("no usable rows in sweep file", file=sys.stderr)
        return 1

    dataset_mode = rows[0]["covariate"] is not None
    panels = sorted({(row["m"], row["covariate" if dataset_mode else "lam"]) for row in rows})
    fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.2), squeeze=False)
    for ax, (m, scenario) in zip(axes[0], panels):
        series = defaultdict(list)
        for row in rows:
            key = row["covariate"] if dataset_mode else row["lam"]
            if row["m"] == m and key == scenario:
                series[row["r"]].append((row["p"], row["re"]))
        if dataset_mode:
            # one bar-like point per r at the dataset's single p
            rs_sorted = sorted(series)
            ax.plot(rs_sorted, [series[r][0][1] for r in rs_sorted], "o-")
            ax.set_xlabel("stages r")
            ax.set_xticks(rs_sorted)
        else:
            for k, r in enumerate(sorted(series)):
                pts = sorted(series[r])
                ax.plot([p for p, _ in pts], [re for _, re in pts],
                        LINESTYLES[k % len(LINESTYLES)], label=f"r={r}")
            ax.set_xlabel("p")
            ax.legend(fontsize=8)
        ax.axhline(1.0, color="gray", lw=0.6)
        ax.set_ylabel("RE vs SRS")
        ax.set_title(f"m={m}, {'covariate' if dataset_mode else 'lambda'}={scenario}")
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=150)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
