#!/usr/bin/env python3
"""Overhead curves for the 2x2 isotropic family.

Writes one CSV row per grid point with the unextendible measures, the
1/E^u overhead curve and the 1/REE reference curve. Defaults reproduce
the published figure range r in [0.55, 1].
"""

import argparse
import csv
import sys

import numpy as np

from uext import applications
from uext.measures import FWOptions

COLUMNS = ("param", "e_rel", "e_max", "e_min", "f_u",
           "overhead_rel", "overhead_ree")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--start", type=float, default=0.55)
    ap.add_argument("--stop", type=float, default=1.0)
    ap.add_argument("--points", type=int, default=19)
    ap.add_argument("--measures", default="e_rel,e_max,e_min,f_u",
                    help="comma list out of e_rel,e_max,e_min,f_u")
    ap.add_argument("--tol", type=float, default=1e-5,
                    help="Frank-Wolfe gap tolerance in bits")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="-", help="CSV path, - for stdout")
    args = ap.parse_args(argv)

    grid = np.linspace(args.start, args.stop, args.points)
    wanted = tuple(m for m in args.measures.split(",") if m)
    rows = applications.sweep("isotropic", grid, wanted,
                              FWOptions(tol=args.tol), jobs=args.jobs)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(["" if row[c] is None else row[c] for c in COLUMNS])
    if fh is not sys.stdout:
        fh.close()
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
