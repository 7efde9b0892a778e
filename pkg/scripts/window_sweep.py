"""Herz ratio refinement growth as alpha crosses the upper window edge n(1 - r).

Every point is run in probe mode so that out-of-window values are measured
rather than rejected.  Output is CSV on stdout.
"""

import argparse
import csv
import sys

from herzlab.exponent import VariableExponent
from herzlab.grid import GridSpec, build_grid
from herzlab.norms import HerzParams
from herzlab.sqfn import build_dictionary
from herzlab.suite import build_suite
from herzlab.verify import herz_boundedness_ratio, validate_window


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=1.0)
    ap.add_argument("--r", type=float, default=0.75)
    ap.add_argument("--alphas", default="-0.4,-0.2,0,0.1,0.2,0.25,0.3,0.45")
    ap.add_argument("--ppu", type=int, default=16)
    ap.add_argument("--levels", type=int, default=3, help="number of resolutions (each a doubling)")
    ap.add_argument("--count", type=int, default=12, help="suite size")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    spec = GridSpec(1, -2, 6, args.ppu)
    grids = [build_grid(spec)]
    for _ in range(args.levels - 1):
        grids.append(build_grid(grids[-1].spec.refined(2)))
    p = VariableExponent.constant(2.0, grids[0])
    suite = build_suite(args.count, args.seed, 1, spec.k_min, spec.k_max)
    dictionary = build_dictionary(1.0, 8, args.seed, 1)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["alpha", "in_window", "resolution", "max_ratio", "growth_vs_coarsest"])
    for alpha in (float(a) for a in args.alphas.split(",")):
        params = HerzParams(alpha, args.q, p, None, args.r, 0.5)
        inside = validate_window(params, 1).accept
        rep = herz_boundedness_ratio(params, 1.0, suite, args.seed, probe=True, grids=grids,
                                     dictionary=dictionary, screen=False)
        by_res = rep.max_by_resolution()
        base = by_res[min(by_res)]
        for res in sorted(by_res):
            out.writerow([alpha, inside, res, f"{by_res[res]:.10g}", f"{by_res[res] / base:.6f}"])
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
