"""Regime labels over a log grid of field gradient and magnet length, written as CSV."""
import argparse
import csv
import sys
from dataclasses import asdict, replace

import numpy as np

from sterngerlach.regime import ParameterPoint, ScanSettings, scan


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    ap.add_argument("--n-eps", type=int, default=25)
    ap.add_argument("--n-len", type=int, default=13)
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args(argv)

    base = ParameterPoint(sigma=1.0, mass=1.0, lam=1.0, velocity=5.0)
    points = [replace(base, epsilon=float(e), magnet_length=float(l))
              for e in np.geomspace(1e-3, 1e2, args.n_eps)
              for l in np.geomspace(1.0, 100.0, args.n_len)]
    reports = scan(points, ScanSettings(n_samples=args.samples, seed=args.seed), workers=args.workers)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        w = csv.writer(fh)
        w.writerow(["epsilon", "magnet_length", "bohm_number", "separation_ratio", "visibility", "label"])
        for rep in reports:
            p = asdict(rep.point)
            w.writerow([repr(p["epsilon"]), repr(p["magnet_length"]), repr(rep.bohm_number),
                        repr(rep.separation_ratio), repr(rep.visibility), rep.label])
    finally:
        if fh is not sys.stdout:
            fh.close()


if __name__ == "__main__":
    main()
