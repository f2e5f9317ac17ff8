#!/usr/bin/env python3
"""Manufactured-solution convergence study; prints L2 errors and fitted orders."""

import argparse

from ns1d import GasModel, HProfile, convergence_study, default_case


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", default="64,128,256")
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--t-end", type=float, default=0.25)
    ap.add_argument("--amplitude", type=float, default=0.1)
    args = ap.parse_args()

    model = GasModel(5 / 3, alpha=args.alpha, h=HProfile.power_sum(1, 1))
    levels = [int(n) for n in args.levels.split(",")]
    rep = convergence_study(default_case(args.amplitude), model, levels, args.t_end)

    print(f"levels: {rep.levels}, t_end = {rep.t_end}, integrator = {rep.integrator}")
    for f in ("v", "u", "theta"):
        errs = "  ".join(f"{e:.3e}" for e in rep.errors_l2[f])
        orders = "  ".join(o if isinstance(o, str) else f"{o:.2f}"
                           for o in rep.orders[f])
        print(f"{f:>6}: L2 errors [{errs}]  orders [{orders}]")


if __name__ == "__main__":
    main()
