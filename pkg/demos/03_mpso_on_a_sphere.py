"""Why MPSO moves its search boxes.

The minimum of this sphere sits at 1.5 in every coordinate, outside the
initial box [-1, 1]^10.  Plain PSO can only press against the wall; MPSO
widens the box of any particle that sits on a bound every ``elim_period``
iterations and re-seeds the worst particles inside the new boxes.
"""
import numpy as np

from heliopt import Bounds, SwarmConfig, run_swarm


def shifted_sphere(x):
    return float(np.sum((x - 1.5) ** 2))


box = Bounds.uniform(-1.0, 1.0, 10)
cfg = SwarmConfig(population=20, iterations=200)

pso = [run_swarm(shifted_sphere, cfg.replace(seed=s, mpso_enabled=False), box) for s in range(11)]
mpso = [run_swarm(shifted_sphere, cfg.replace(seed=s), box) for s in range(11)]

print("PSO  median final cost:", np.median([r.best_cost for r in pso]))
print("MPSO median final cost:", np.median([r.best_cost for r in mpso]))
# the wall-limited optimum is 10 * 0.5^2 = 2.5

uppers = np.array([p.bounds.upper for p in mpso[0].swarm.particles])
print("MPSO seed 0, largest upper bound per particle:", uppers.max(axis=1).round(2))

# inertia and best-cost trace of one run
r = mpso[0]
for it in (0, 39, 40, 41, 79, 80, 81, 199):
    print(f"it {it:3d}  w = {r.inertia[it]:.4f}  best = {r.trace[it]:.5f}  "
          f"mean = {r.mean_trace[it]:.3f}")
