#!/usr/bin/env python3
"""Sweep the temperature exponent alpha and compare decay metrics across runs."""

import argparse
from pathlib import Path

from ns1d import default_config, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--values", default="-0.1,-0.05,0,0.05,0.1")
    ap.add_argument("--t-end", type=float, default=5.0)
    ap.add_argument("--N", type=int, default=256)
    ap.add_argument("--out", default="out/alpha_sweep")
    args = ap.parse_args()

    cfg = default_config("gauss-pulse")
    cfg.grid_N = args.N
    cfg.t_end = args.t_end
    values = [float(v) for v in args.values.split(",")]
    summaries = sweep(cfg, "alpha", values, out_dir=Path(args.out))

    print(f"{'alpha':>7} {'status':>7} {'steps':>7} {'sup_dev(T)':>12} "
          f"{'half_time':>10} {'c4_fit':>10}")
    for value, s in zip(values, summaries):
        if s.exit_status != "ok":
            print(f"{value:7.3f} {'error':>7}  {s.error}")
            continue
        half = s.decay["half_time"] if s.decay else None
        print(f"{value:7.3f} {s.exit_status:>7} {s.steps:7d} "
              f"{s.final_record['sup_dev']:12.4e} "
              f"{half if half is not None else 'n/a':>10} "
              f"{s.c4_fit:10.4e}")


if __name__ == "__main__":
    main()
