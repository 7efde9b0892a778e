"""L^p(.)(w) boundedness ratios of M and S~ over several grid doublings.

Writes one CSV row per (operator, resolution) with the suite maximum and its
growth relative to the coarsest grid.
"""

import argparse
import csv
import sys

from herzlab.exponent import VariableExponent
from herzlab.grid import GridSpec, build_grid
from herzlab.suite import build_suite
from herzlab.verify import lp_boundedness_ratio
from herzlab.weights import Weight


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--exponent", default="ramp:2,3")
    ap.add_argument("--weight", default="power:0.25")
    ap.add_argument("--ppu", type=int, default=16)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--dict-size", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    spec = GridSpec(1, -2, 6, args.ppu)
    grids = [build_grid(spec)]
    for _ in range(args.levels - 1):
        grids.append(build_grid(grids[-1].spec.refined(2)))
    p = VariableExponent.from_preset(args.exponent, grids[0])
    w = Weight.from_preset(args.weight, grids[0], p)
    suite = build_suite(args.count, args.seed, 1, spec.k_min, spec.k_max)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["operator", "resolution", "nodes", "max_ratio", "growth_vs_coarsest"])
    for op in ("maximal", "s_beta"):
        rep = lp_boundedness_ratio(op, p, w, suite, args.seed, grids, args.dict_size)
        by_res = rep.max_by_resolution()
        base = by_res[min(by_res)]
        for g in grids:
            res = g.spec.points_per_unit
            out.writerow([op, res, g.size, f"{by_res[res]:.10g}", f"{by_res[res] / base:.6f}"])
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
