"""Refinement verdicts of the weight-class chain for a scan of power weights.

Prints one row per weight with the verdict (F finite, D divergent) and the
per-doubling growth of each class constant.
"""

import argparse

from herzlab.exponent import VariableExponent
from herzlab.grid import GridSpec, build_grid
from herzlab.verify import CHAIN, check_inclusion_chain
from herzlab.weights import Weight


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", default="ramp:2,3", help="exponent preset for p")
    ap.add_argument("--q", default="ramp:3,4", help="exponent preset for q (q >= p)")
    ap.add_argument("--powers", default="-0.9,-0.5,0,0.5,1.5,3", help="comma separated power-weight exponents")
    ap.add_argument("--ppu", type=int, default=16, help="points per unit of the coarsest grid")
    ap.add_argument("--levels", type=int, default=4, help="grid doublings per verdict")
    ap.add_argument("--centers", type=int, default=16, help="ball centers per axis")
    args = ap.parse_args(argv)

    grid = build_grid(GridSpec(1, -1, 2, args.ppu))
    p = VariableExponent.from_preset(args.p, grid)
    q = VariableExponent.from_preset(args.q, grid)
    zoo = [Weight.power(float(a), grid) for a in args.powers.split(",")]
    table = check_inclusion_chain(zoo, p, q, args.levels, args.centers)

    print(f"{'weight':14s} " + " ".join(f"{c:>6s}" for c in CHAIN) + "  monotone")
    for row in table.rows:
        marks = " ".join(f"{'F' if f else 'D':>6s}" for f in row.finite)
        print(f"{row.descriptor:14s} {marks}  {row.monotone}")
    print()
    print("growth per doubling")
    for row in table.rows:
        cells = ["/".join(f"{g:.2f}" for g in gr) for gr in row.growth]
        print(f"{row.descriptor:14s} " + "  ".join(cells))
    return 0 if table.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
