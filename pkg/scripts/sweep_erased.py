#!/usr/bin/env python3
"""Distillation overhead of the erased state versus erasure probability.

The computed 1/E^u column should track the closed form 1/(1-eps); the
optional Monte-Carlo column estimates the same overhead by simulating the
post-selection protocol.
"""

import argparse
import csv
import sys

import numpy as np

from uext import applications
from uext.measures import FWOptions

COLUMNS = ("param", "e_rel", "e_max", "e_min", "f_u",
           "overhead_rel", "overhead_ree", "overhead_mc")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--start", type=float, default=0.0)
    ap.add_argument("--stop", type=float, default=0.9)
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--measures", default="e_rel,e_max,e_min,f_u")
    ap.add_argument("--tol", type=float, default=1e-5)
    ap.add_argument("--trials", type=int, default=0,
                    help="Monte-Carlo trials per point (0 disables)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="-", help="CSV path, - for stdout")
    args = ap.parse_args(argv)

    grid = np.linspace(args.start, args.stop, args.points)
    wanted = tuple(m for m in args.measures.split(",") if m)
    rows = applications.sweep("erased", grid, wanted,
                              FWOptions(tol=args.tol), jobs=args.jobs)
    for row in rows:
        if args.trials > 0:
            row["overhead_mc"] = applications.erased_protocol_monte_carlo(
                row["param"], trials=args.trials, seed=args.seed)
        else:
            row["overhead_mc"] = None
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
