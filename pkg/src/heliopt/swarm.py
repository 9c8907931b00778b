"""Particle swarm optimisation with the MPSO extensions.

MPSO adds two steps to standard PSO, both run every ``elim_period``
iterations: each particle's private search box grows or shrinks one
"unit" per dimension depending on where the particle sits, and the worst
``elim_percent`` of the swarm is resampled inside those boxes.  With
``mpso_enabled=False`` neither step runs and the optimiser is plain
global-best PSO with geometric inertia decay.

Random draws happen in a fixed order so runs are reproducible: at
initialisation, per particle, ``D`` uniforms for the position followed by
``D`` for the velocity; at each update, per particle in index order, ``D``
uniforms for ``r1`` then ``D`` for ``r2``; at elimination, per replaced
particle in index order, position then velocity.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).copy()
        hi = np.asarray(self.upper, dtype=float).copy()
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def uniform(cls, lower: float, upper: float, dim: int) -> "Bounds":
        return cls(np.full(dim, float(lower)), np.full(dim, float(upper)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def half_width(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)

    def copy(self) -> "Bounds":
        return Bounds(self.lower, self.upper)


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    bounds: Bounds
    best_position: np.ndarray = None
    best_cost: float = math.inf
    cost: float = math.inf

    def __post_init__(self):
        if self.best_position is None:
            self.best_position = self.position.copy()


@dataclass(frozen=True)
class SwarmConfig:
    population: int = 30
    iterations: int = 500
    w0: float = 1.0
    w_decay: float = 0.98
    c1: float = 2.0
    c2: float = 2.0
    seed: int = 0
    mpso_enabled: bool = True
    elim_percent: float = 75.0
    elim_period: int = 40
    saturation_percent: float = 90.0

    def __post_init__(self):
        if self.population <= 0:
            raise ValueError("population must be positive")
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")
        if not 0 < self.w_decay <= 1:
            raise ValueError("w_decay must lie in (0, 1]")
        if not 0 <= self.elim_percent <= 100:
            raise ValueError("elim_percent must lie in [0, 100]")
        if self.elim_period <= 0:
            raise ValueError("elim_period must be positive")
        if not 0 <= self.saturation_percent <= 100:
            raise ValueError("saturation_percent must lie in [0, 100]")

    def replace(self, **changes) -> "SwarmConfig":
        return replace(self, **changes)


@dataclass
class Swarm:
    particles: list
    reference: Bounds
    best_position: np.ndarray
    best_cost: float = math.inf

    def __len__(self):
        return len(self.particles)


@dataclass
class SwarmResult:
    best_position: np.ndarray
    best_cost: float
    trace: np.ndarray
    mean_trace: np.ndarray
    inertia: np.ndarray
    swarm: Swarm = field(repr=False)

    def __iter__(self):
        # unpacks as (best_position, best_cost, trace)
        return iter((self.best_position, self.best_cost, self.trace))


def _sample(bounds: Bounds, rng):
    width = bounds.upper - bounds.lower
    position = bounds.lower + width * rng.random(bounds.dim)
    velocity = width * (rng.random(bounds.dim) - 0.5)
    return position, velocity


def init_swarm(bounds: Bounds, cfg: SwarmConfig, rng) -> Swarm:
    """Uniform positions inside ``bounds``, velocities in +-half the width."""
    particles = []
    for _ in range(cfg.population):
        x, v = _sample(bounds, rng)
        particles.append(Particle(x, v, bounds.copy()))
    return Swarm(particles, bounds.copy(), particles[0].position.copy())


def inertia_at(iteration: int, cfg: SwarmConfig) -> float:
    if iteration < 0:
        raise ValueError("iteration must be non-negative")
    return cfg.w0 * cfg.w_decay ** iteration


def update_particle(p: Particle, g_best: np.ndarray, w: float, cfg: SwarmConfig, rng) -> Particle:
    """Velocity/position update followed by clamping to the particle's box.

    A clamped coordinate has its velocity component zeroed.
    """
    d = p.position.size
    r1 = rng.random(d)
    r2 = rng.random(d)
    x = p.position
    v = w * p.velocity + cfg.c1 * r1 * (p.best_position - x) + cfg.c2 * r2 * (g_best - x)
    x = x + v
    out = (x < p.bounds.lower) | (x > p.bounds.upper)
    x = np.clip(x, p.bounds.lower, p.bounds.upper)
    v[out] = 0.0
    p.position = x
    p.velocity = v
    return p


def adapt_bounds(p: Particle, saturation_percent: float, reference: Bounds) -> Particle:
    """Grow or shrink the particle's box by one unit per dimension.

    The unit is ``(1 - saturation/100)`` times the half-width of the
    reference box.  A coordinate at or beyond a bound pushes that bound
    outwards; otherwise the bound moves inwards, but never past the
    coordinate itself.
    """
    unit = (100.0 - saturation_percent) / 100.0 * reference.half_width
    x = p.position
    lo, hi = p.bounds.lower, p.bounds.upper
    new_hi = np.where(x >= hi, hi + unit, np.maximum(hi - unit, x))
    new_lo = np.where(x <= lo, lo - unit, np.minimum(lo + unit, x))
    p.bounds = Bounds(new_lo, new_hi)
    return p


def elimination_count(cfg: SwarmConfig) -> int:
    return math.ceil(round(cfg.elim_percent * cfg.population / 100.0, 9))


def eliminate(swarm: Swarm, cfg: SwarmConfig, rng) -> list:
    """Resample the worst particles inside their own boxes.

    Particles are ranked by their latest cost, highest first; ties go to
    the lower index.  Returns the replaced indices.  The swarm-wide best is
    kept.
    """
    k = elimination_count(cfg)
    if k == 0:
        return []
    order = sorted(range(len(swarm)), key=lambda i: (-swarm.particles[i].cost, i))
    replaced = sorted(order[:k])
    for i in replaced:
        p = swarm.particles[i]
        p.position, p.velocity = _sample(p.bounds, rng)
        p.best_position = p.position.copy()
        p.best_cost = math.inf
        p.cost = math.inf
    return replaced


def _evaluate(swarm: Swarm, objective, map_fn) -> np.ndarray:
    costs = np.fromiter(map_fn(objective, [p.position for p in swarm.particles]),
                        dtype=float, count=len(swarm))
    for p, c in zip(swarm.particles, costs):
        p.cost = float(c)
        if c < p.best_cost:
            p.best_cost = float(c)
            p.best_position = p.position.copy()
        if c < swarm.best_cost:
            swarm.best_cost = float(c)
            swarm.best_position = p.position.copy()
    return costs


def run(objective: Callable[[np.ndarray], float], cfg: SwarmConfig, bounds: Bounds,
        map_fn: Callable = map, callback: Callable | None = None) -> SwarmResult:
    """Minimise ``objective`` inside ``bounds``.

    ``map_fn`` evaluates the swarm each iteration (``executor.map`` works);
    results are consumed in particle order.  ``callback(iteration, swarm)``
    is invoked after each evaluation.
    """
    rng = np.random.default_rng(cfg.seed)
    swarm = init_swarm(bounds, cfg, rng)
    trace, mean_trace, inertia = [], [], []
    fresh: Iterable[int] = ()
    for it in range(cfg.iterations):
        costs = _evaluate(swarm, objective, map_fn)
        w = inertia_at(it, cfg)
        trace.append(swarm.best_cost)
        finite = costs[np.isfinite(costs)]
        mean_trace.append(float(finite.mean()) if finite.size else math.inf)
        inertia.append(w)
        if callback is not None:
            callback(it, swarm)
        if it == cfg.iterations - 1:
            break
        fresh = set()
        if cfg.mpso_enabled and it > 0 and it % cfg.elim_period == 0:
            for p in swarm.particles:
                adapt_bounds(p, cfg.saturation_percent, swarm.reference)
            fresh = set(eliminate(swarm, cfg, rng))
        for i, p in enumerate(swarm.particles):
            if i not in fresh:
                update_particle(p, swarm.best_position, w, cfg, rng)
    return SwarmResult(swarm.best_position.copy(), swarm.best_cost, np.array(trace),
                       np.array(mean_trace), np.array(inertia), swarm)


def write_trace_csv(result: SwarmResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "best_cost", "mean_cost", "w"])
        for i, (b, m, w) in enumerate(zip(result.trace, result.mean_trace, result.inertia)):
            writer.writerow([i, repr(float(b)), repr(float(m)), repr(float(w))])
