#!/usr/bin/env python3
"""Map empirical boundedness against the closed-form classifier over an
(m, mu) lattice and write phase.csv.

The defaults keep the sweep desk-sized (32^2 cells, T = 8); pass --full
for a 96^2, T = 50 version of the same lattice (slow on one core).
"""

from __future__ import annotations

import argparse
import time

from kelsim.config import parse_config
from kelsim.sweep import build_sweep_spec, run_sweep

TEMPLATE = """\
N = 2
chi = 1.0
c_d = 1.0
nx = {n}
ny = {n}
u0_kind = noise
u0_seed = 11
u0_amplitude = 0.45
v0_kind = noise
v0_seed = 12
v0_amplitude = 0.2
t_end = {t_end}
safety = 0.75
record_every = {rec}
sweep_axis1 = m
sweep_values1 = 0.8 1.0 1.25 1.5 2.0
sweep_axis2 = mu
sweep_values2 = 0.0 0.25 0.5 1.0
workers = {workers}
"""


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true",
                    help="96^2 cells and T = 50 instead of the desk-size defaults")
    ap.add_argument("--out", default="phase.csv")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    n, t_end = (96, 50.0) if args.full else (32, 8.0)
    cfg = parse_config(TEMPLATE.format(n=n, t_end=t_end, rec=t_end / 48.0,
                                       workers=args.workers))
    spec = build_sweep_spec(cfg)
    t0 = time.perf_counter()
    cells = run_sweep(spec, csv_path=args.out)
    dt = time.perf_counter() - t0

    print(f"\n{'m':>6} {'mu':>6} {'empirical':>10} {'theoretical':>12} {'agree':>6}")
    for c in cells:
        print(f"{c.axis1_value:6.2f} {c.axis2_value:6.2f} {c.empirical:>10}"
              f" {c.theoretical.status.value:>12} {str(c.agree).lower():>6}")
    bad = [c for c in cells if not c.agree]
    print(f"\n{len(cells)} cells in {dt:.0f} s -> {args.out}; "
          f"{len(bad)} disagreement(s)")


if __name__ == "__main__":
    main()
