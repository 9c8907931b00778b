"""Tuned adaptive fuzzy controller across the four test scenarios.

Uses the desk-tuned parameter vector shipped with the package (found with
MPSO, 30 particles, 100 iterations).  Pass a different vector as ``.npy``
on the command line to compare.
"""
import sys

import numpy as np

from heliopt import SCENARIOS, decode, simulate
from heliopt.experiments import DESK_TUNED, PARAMETER_NAMES

vec = np.load(sys.argv[1]) if len(sys.argv) > 1 else DESK_TUNED

for name, value in zip(PARAMETER_NAMES, vec):
    print(f"{name:>14s} = {value:9.4f}")
print()

print(f"{'scenario':>10s} {'rmse':>8s} {'iacs':>9s} {'|u2| tail':>10s} stable")
for name, sc in SCENARIOS.items():
    run = simulate(sc, decode(vec))
    tail = run.window(15.0)
    u2 = np.abs(run.controls[tail, 3]).mean() if tail.any() else np.nan
    print(f"{name:>10s} {run.rmse:8.4f} {run.iacs:9.2f} {u2:10.4f} {run.stable}")

# where the disturbance run deviates from the nominal one
nom = simulate(SCENARIOS["nominal"], vec)
dist = simulate(SCENARIOS["disturbed"], vec)
for d in SCENARIOS["disturbed"].disturbances:
    after = dist.window(d.onset, d.onset + 2.0)
    peak = np.abs(dist.errors[after] - nom.errors[after]).max(axis=0)
    print(f"{d.axis} step {d.magnitude:g} at {d.onset:g} s: extra error peak "
          f"roll {peak[0]:.3f}  pitch {peak[1]:.3f}  yaw {peak[2]:.3f}")
