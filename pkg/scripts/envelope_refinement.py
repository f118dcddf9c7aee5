"""Radial envelope error against the 1D log-hull oracle under grid refinement.

Compares the boundary-layer rules of ``build_grid`` and writes a CSV table.
"""

import argparse
import csv
import sys
import time

from pshlab.envelope import sh_envelope
import numpy as np

from pshlab.grid import GeneratorSpec, build_grid, make_field
from pshlab.scenarios import radial_oracle_error


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--obstacle", default="cone(4, -3, 0)")
    ap.add_argument("--sizes", type=int, nargs="+", default=[51, 101, 201])
    ap.add_argument("--rules", nargs="+", default=["nearest", "band"])
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    gen = GeneratorSpec.parse(args.obstacle)
    profile = lambda r: gen(np.asarray(r, dtype=complex))
    rows = []
    for rule in args.rules:
        prev = None
        for n in args.sizes:
            g = build_grid("disk(1)", n, rule)
            t0 = time.perf_counter()
            rep = sh_envelope(make_field(g, args.obstacle))
            dt = time.perf_counter() - t0
            err = radial_oracle_error(rep.envelope, profile)
            rows.append({"rule": rule, "n": n, "spacing": g.spacing, "error": err,
                         "factor": prev / err if prev else float("nan"), "seconds": dt,
                         "iterations": rep.iterations})
            prev = err
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
