"""Largest certified cluster at p = c/n for small c.

At p = 42/n and desk-scale n the graph is already past the connectivity
window, so every trial is fully certified. Smaller c shows where the
certified fraction stops being negligible.

Run: python demos/linear_phase.py [n] [trials]
"""

import sys

from linerecon.experiments import SweepConfig, sweep

n = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
trials = int(sys.argv[2]) if len(sys.argv) > 2 else 5
grid = (1.5, 2.0, 3.0, 4.0, 6.0, 10.0, 42.0)

print(f"n={n}, p=c/n, {trials} trials per point")
print(f"{'c':>5} {'median certified':>17} {'full':>6}")
for row in sweep(SweepConfig(ns=(n,), grid=grid, mode="linear", trials=trials, seed=1)):
    print(f"{row.c:>5g} {row.median_frac_certified:>17.3f} {row.frac_full:>6.2f}")
