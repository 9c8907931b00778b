import math

import numpy as np
import pytest

from _reference import reference_pso
from heliopt.swarm import (
    Bounds, Particle, Swarm, SwarmConfig, adapt_bounds, eliminate, elimination_count, inertia_at,
    init_swarm, run, update_particle, write_trace_csv,
)


def sphere(x):
    return float(np.sum(x * x))


def shifted_sphere(x):
    return float(np.sum((x - 1.2) ** 2))


class OnesRng:
    """Stands in for a Generator when r1 = r2 = 1 is wanted."""

    def random(self, n):
        return np.ones(n)


def test_bounds_validation():
    with pytest.raises(ValueError):
        Bounds(np.ones(2), np.zeros(2))
    with pytest.raises(ValueError):
        Bounds(np.zeros(2), np.ones(3))


def test_config_validation():
    with pytest.raises(ValueError):
        SwarmConfig(population=0)
    with pytest.raises(ValueError):
        SwarmConfig(w_decay=1.5)
    with pytest.raises(ValueError):
        SwarmConfig(saturation_percent=120)


def test_inertia_decays_geometrically():
    cfg = SwarmConfig()
    assert inertia_at(0, cfg) == 1.0
    assert inertia_at(2, cfg) == pytest.approx(0.98 ** 2)


def test_init_inside_box():
    b = Bounds.uniform(-2.0, 3.0, 4)
    sw = init_swarm(b, SwarmConfig(population=50), np.random.default_rng(1))
    xs = np.array([p.position for p in sw.particles])
    assert xs.shape == (50, 4) and np.all(xs >= -2) and np.all(xs <= 3)


def test_update_with_unit_draws():
    b = Bounds.uniform(-10.0, 10.0, 2)
    p = Particle(np.array([1.0, 1.0]), np.array([0.5, -0.5]), b,
                 best_position=np.array([2.0, 0.0]))
    cfg = SwarmConfig(c1=2.0, c2=2.0)
    update_particle(p, np.array([0.0, 3.0]), 0.5, cfg, OnesRng())
    # v = 0.5 v + 2 (pbest - x) + 2 (g - x)
    assert np.allclose(p.velocity, [0.25 + 2 - 2, -0.25 - 2 + 4])
    assert np.allclose(p.position, [1.25, 2.75])


def test_update_clamps_and_zeroes_velocity():
    b = Bounds.uniform(0.0, 1.0, 2)
    p = Particle(np.array([0.9, 0.5]), np.array([1.0, 0.0]), b)
    update_particle(p, p.position.copy(), 1.0, SwarmConfig(), OnesRng())
    assert p.position[0] == 1.0 and p.velocity[0] == 0.0


def test_adapt_bounds_expand_and_shrink():
    ref = Bounds.uniform(0.0, 10.0, 3)
    p = Particle(np.array([10.0, 5.0, 0.0]), np.zeros(3), ref.copy())
    adapt_bounds(p, 90.0, ref)
    # unit = 0.1 * half-width 5 = 0.5
    assert np.allclose(p.bounds.upper, [10.5, 9.5, 9.5])
    assert np.allclose(p.bounds.lower, [0.5, 0.5, -0.5])


def test_adapt_bounds_never_shrinks_past_particle():
    ref = Bounds.uniform(0.0, 10.0, 1)
    p = Particle(np.array([9.8]), np.zeros(1), ref.copy())
    adapt_bounds(p, 0.0, ref)
    assert p.bounds.upper[0] == 9.8 and p.bounds.lower[0] == 5.0


def test_elimination_count_rounds_up():
    assert elimination_count(SwarmConfig(population=30, elim_percent=75)) == 23
    assert elimination_count(SwarmConfig(population=4, elim_percent=50)) == 2
    assert elimination_count(SwarmConfig(population=4, elim_percent=0)) == 0


def test_eliminate_replaces_worst_and_keeps_gbest():
    b = Bounds.uniform(0.0, 1.0, 2)
    rng = np.random.default_rng(0)
    sw = init_swarm(b, SwarmConfig(population=4), rng)
    for p, c in zip(sw.particles, [3.0, 1.0, 2.0, 0.5]):
        p.cost = p.best_cost = c
    sw.best_cost, sw.best_position = 0.5, sw.particles[3].position.copy()
    g = sw.best_position.copy()
    replaced = eliminate(sw, SwarmConfig(population=4, elim_percent=50), rng)
    assert replaced == [0, 2]
    assert sw.particles[0].best_cost == math.inf
    assert sw.best_cost == 0.5 and np.array_equal(sw.best_position, g)


@pytest.mark.parametrize("mpso", [False, True])
def test_trace_monotone_and_population_constant(mpso):
    sizes = []
    cfg = SwarmConfig(population=12, iterations=90, seed=3, mpso_enabled=mpso, elim_period=10)
    res = run(sphere, cfg, Bounds.uniform(-5, 5, 4), callback=lambda i, s: sizes.append(len(s)))
    assert np.all(np.diff(res.trace) <= 0)
    assert set(sizes) == {12}
    assert res.best_cost == res.trace[-1] == sphere(res.best_position)


def test_plain_pso_matches_reference():
    cfg = SwarmConfig(population=10, iterations=60, seed=11, mpso_enabled=False)
    b = Bounds.uniform(-3.0, 4.0, 5)
    res = run(shifted_sphere, cfg, b)
    g, c, trace = reference_pso(shifted_sphere, cfg, b)
    assert np.array_equal(res.best_position, g)
    assert res.best_cost == c
    assert np.array_equal(res.trace, trace)


def test_seeded_runs_repeat():
    cfg = SwarmConfig(population=8, iterations=50, seed=5, elim_period=10)
    a = run(sphere, cfg, Bounds.uniform(-1, 1, 3))
    b = run(sphere, cfg, Bounds.uniform(-1, 1, 3))
    assert np.array_equal(a.trace, b.trace) and np.array_equal(a.best_position, b.best_position)


def test_mpso_escapes_initial_box():
    b = Bounds.uniform(0.0, 1.0, 10)
    cfg = SwarmConfig(population=20, iterations=200, seed=0)
    mpso = run(shifted_sphere, cfg, b)
    pso = run(shifted_sphere, cfg.replace(mpso_enabled=False), b)
    assert mpso.best_cost < pso.best_cost
    assert np.any(mpso.best_position > 1.0)


def test_results_unpack_and_csv(tmp_path):
    res = run(sphere, SwarmConfig(population=5, iterations=4), Bounds.uniform(-1, 1, 2))
    pos, cost, trace = res
    assert cost == res.best_cost and len(trace) == 4
    write_trace_csv(res, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "iteration,best_cost,mean_cost,w" and len(lines) == 5


def test_swarm_len():
    b = Bounds.uniform(0, 1, 1)
    assert len(Swarm([Particle(np.zeros(1), np.zeros(1), b)], b, np.zeros(1))) == 1


def test_worked_bound_examples():
    ref = Bounds.uniform(-1.0, 1.0, 1)
    p = Particle(np.array([1.05]), np.zeros(1), ref.copy())
    assert adapt_bounds(p, 90.0, ref).bounds.upper[0] == pytest.approx(1.1)
    p = Particle(np.array([0.5]), np.zeros(1), ref.copy())
    assert adapt_bounds(p, 90.0, ref).bounds.upper[0] == pytest.approx(0.9)
    p = Particle(np.array([0.5]), np.zeros(1), ref.copy())
    assert adapt_bounds(p, 100.0, ref).bounds.upper[0] == 1.0
    assert elimination_count(SwarmConfig(population=30, elim_percent=20)) == 6
    assert inertia_at(100, SwarmConfig()) == pytest.approx(0.13262, abs=1e-5)


def test_converges_on_interior_minimum():
    def target(x):
        return float(np.sum((x - 0.3) ** 2))

    res = run(target, SwarmConfig(population=30, iterations=200, seed=1),
              Bounds.uniform(-1.0, 1.0, 5))
    assert res.best_cost <= 1e-6


def test_plain_pso_keeps_global_box():
    b = Bounds.uniform(-1.0, 1.0, 3)
    res = run(sphere, SwarmConfig(population=6, iterations=90, mpso_enabled=False), b)
    assert all(np.array_equal(p.bounds.upper, b.upper) for p in res.swarm.particles)


def test_particle_bests_monotone():
    history = []

    def record(it, swarm):
        history.append([p.best_cost for p in swarm.particles])

    run(sphere, SwarmConfig(population=6, iterations=30, mpso_enabled=False),
        Bounds.uniform(-1, 1, 2), callback=record)
    assert np.all(np.diff(np.array(history), axis=0) <= 0)
