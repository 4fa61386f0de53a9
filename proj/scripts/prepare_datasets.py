#!/usr/bin/env python3
"""Convert the UCI/Statlog source files into the CSV layout the CLI expects.

Sources (fetch manually, the tooling never downloads):
  WDBC:       http://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/wdbc.data
  Heart:      http://archive.ics.uci.edu/ml/machine-learning-databases/statlog/heart/heart.dat
  Australian: http://archive.ics.uci.edu/ml/machine-learning-databases/statlog/australian/australian.dat

WDBC can alternatively be produced from scikit-learn's bundled copy of the
same UCI file (no network needed): `prepare_datasets.py wdbc --from-sklearn`.

Output layout: one header row, label column first, feature columns f01..fNN.
Values are written with shortest-roundtrip formatting so reparsing yields
bit-identical doubles.
"""

import argparse
import csv
import sys
from pathlib import Path


def write_csv(out_path, header, rows):
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {out} ({len(rows)} rows, {len(header) - 1} features)")


def fmt(x):
    return repr(float(x))


def convert_wdbc(raw_path, out_path, from_sklearn):
    rows = []
    if from_sklearn:
        from sklearn.datasets import load_breast_cancer

        bunch = load_breast_cancer()
        # sklearn target: 0 = malignant, 1 = benign; UCI file uses M/B
        for target, feats in zip(bunch.target, bunch.data):
            label = "M" if target == 0 else "B"
            rows.append([label] + [fmt(v) for v in feats])
    else:
        with open(raw_path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                # drop the patient id column
                rows.append([parts[1]] + [fmt(v) for v in parts[2:]])
    q = len(rows[0]) - 1
    header = ["diagnosis"] + [f"f{i:02d}" for i in range(1, q + 1)]
    write_csv(out_path, header, rows)


def convert_whitespace(raw_path, out_path, label_name):
    rows = []
    with open(raw_path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            # label is the last field in both Statlog files
            rows.append([parts[-1].rstrip(".0") if parts[-1] in ("1.0", "2.0") else parts[-1]]
                        + [fmt(v) for v in parts[:-1]])
    q = len(rows[0]) - 1
    header = [label_name] + [f"f{i:02d}" for i in range(1, q + 1)]
    write_csv(out_path, header, rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("dataset", choices=["wdbc", "heart", "australian"])
    ap.add_argument("--raw", help="path to the downloaded UCI file")
    ap.add_argument("--out", help="output csv (default data/<name>.csv)")
    ap.add_argument("--from-sklearn", action="store_true",
                    help="wdbc only: use scikit-learn's bundled UCI copy")
    args = ap.parse_args()

    out = args.out or str(Path(__file__).resolve().parent.parent / "data" / f"{args.dataset}.csv")
    if args.dataset == "wdbc":
        if not args.from_sklearn and not args.raw:
            sys.exit("wdbc: pass --raw wdbc.data or --from-sklearn")
        convert_wdbc(args.raw, out, args.from_sklearn)
    else:
        if not args.raw:
            sys.exit(f"{args.dataset}: pass --raw <file> (see module docstring for the URL)")
        convert_whitespace(args.raw, out, "label")


if __name__ == "__main__":
    main()
