#!/usr/bin/env python3
"""Fetch the Wisconsin breast-cytology dataset and write the canonical CSV.

The raw file (UCI machine-learning repository, breast-cancer-wisconsin.data)
has no header and eleven comma-separated fields per row:

    sample_id, 9 cytological scores (1-10, '?' where missing), class (2|4)

This script drops the id column, maps class 2 -> benign and 4 -> malignant,
and writes a headered CSV with the canonical column names used by
``ranksamp.data.load_wbcd`` (aliases Y1..Y9 refer to these nine covariates
in order; missing scores are kept as empty cells for the loader's
missing-value policy to handle).

Usage:
    python scripts/fetch_wbcd.py                      # download -> data/wbcd.csv
    python scripts/fetch_wbcd.py --from-file raw.data # convert a local copy
"""

import argparse
import csv
import sys
import urllib.request
from pathlib import Path

URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/"
    "breast-cancer-wisconsin/breast-cancer-wisconsin.data"
)
COLUMNS = [
    "clump_thickness",
    "cell_size_uniformity",
    "cell_shape_uniformity",
    "marginal_adhesion",
    "epithelial_cell_size",
    "bare_nuclei",
    "bland_chromatin",
    "normal_nucleoli",
    "mitoses",
    "class",
]
CLASS_LABELS = {"2": "benign", "4": "malignant"}


def convert(lines, out_path: Path) -> int:
    rows = 0
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for raw in lines:
            line = raw.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 11:
                print(f"skipping malformed row: {line!r}", file=sys.stderr)
                continue
            scores = ["" if v == "?" else v for v in fields[1:10]]
            label = CLASS_LABELS.get(fields[10])
            if label is None:
                print(f"skipping row with unknown class {fields[10]!r}", file=sys.stderr)
                continue
            writer.writerow(scores + [label])
            rows += 1
    return rows


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/wbcd.csv", help="output CSV path")
    ap.add_argument("--from-file", default=None, help="convert a local raw file instead of downloading")
    ap.add_argument("--url", default=URL)
    args = ap.parse_args()

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if args.from_file:
        lines = Path(args.from_file).read_text().splitlines()
    else:
        print(f"downloading {args.url}", file=sys.stderr)
        with urllib.request.urlopen(args.url, timeout=60) as resp:
            lines = resp.read().decode("ascii").splitlines()
    rows = convert(lines, out_path)
    print(f"wrote {rows} rows to {out_path}", file=sys.stderr)
    return 0 if rows else 1


if __name__ == "__main__":
    sys.exit(main())
