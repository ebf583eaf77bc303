"""Certified and structurally failing fractions across the sharp window.

Run: python demos/threshold_window.py [n] [trials]
"""

import sys

from linerecon.experiments import SweepConfig, sweep

n = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
trials = int(sys.argv[2]) if len(sys.argv) > 2 else 10
grid = tuple(float(c) for c in range(-6, 7, 2))

print(f"n={n}, p=(ln n + ln ln n + c)/n, {trials} trials per point")
print(f"{'c':>5} {'p':>9} {'full':>6} {'struct fail':>12} {'mean certified':>15}")
for row in sweep(SweepConfig(ns=(n,), grid=grid, mode="sharp", trials=trials, seed=1)):
    print(f"{row.c:>5.0f} {row.p:>9.5f} {row.frac_full:>6.2f} {row.frac_struct_fail:>12.2f} {row.mean_frac_certified:>15.3f}")
