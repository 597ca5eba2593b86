"""Run the verification battery over parameter grids of each family and write a CSV summary."""

import argparse
import csv
import sys

from cubicball.cli import DEFAULT_TOL, sweep_grid, sweep_point


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--families", default="bcefgh")
    ap.add_argument("--grid", type=int, default=8)
    ap.add_argument("--output", help="CSV path; stdout if omitted")
    args = ap.parse_args()

    out = open(args.output, "w", newline="") if args.output else sys.stdout
    w = csv.writer(out)
    w.writerow(["family", "params", "ok", "norm", "maxima", "minima", "saddles", "circles", "rank"])
    failed = 0
    for fam in args.families.lower():
        for prm in sweep_grid(fam, args.grid):
            row = sweep_point((fam, prm, DEFAULT_TOL))
            c = row["census"]
            failed += not row["ok"]
            label = ";".join(f"{k}={v:.6g}" for k, v in prm.items())
            w.writerow([fam, label, row["ok"], f"{row['norm']:.17g}", c["maxima"], c["minima"], c["saddles"], c["circles"], row["rank"]])
    if args.output:
        out.close()
    print(f"{failed} failed", file=sys.stderr)


if __name__ == "__main__":
    main()
