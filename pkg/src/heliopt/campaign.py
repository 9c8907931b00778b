"""Multi-seed optimiser comparison, statistics and plot-data files.

A campaign runs every algorithm once per seed on the nominal tracking
objective.  Runs are independent and may go to a process pool; results are
collected in (algorithm, seed) order by the caller so output files are
written by a single process.

Plot data is plain CSV.  Timing lives in its own file so that the summary
of a campaign is byte-identical for the same seeds and configuration.
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from heliopt.experiments import (
    NOMINAL, MPSO_BOUNDS, UNIFORM_BOUNDS, NominalObjective, RunRecord, Scenario, write_run_csv,
)
from heliopt.stats import friedman_ranks, wilcoxon_signed_rank
from heliopt.swarm import Bounds, SwarmConfig, SwarmResult, run as run_swarm

ALGORITHMS = ("pso", "mpso")

SUMMARY_HEADER = ["algorithm", "runs", "best", "mean", "median", "std", "worst", "best_seed"]


def algorithm_setup(algorithm: str, cfg: SwarmConfig, mpso_bounds: Bounds = MPSO_BOUNDS,
                    pso_bounds: Bounds = UNIFORM_BOUNDS) -> tuple[SwarmConfig, Bounds]:
    """Swarm settings for one named algorithm.

    Plain PSO searches the wide uniform box; MPSO starts from the narrower
    per-parameter box and adapts it.
    """
    if algorithm == "pso":
        return cfg.replace(mpso_enabled=False), pso_bounds
    if algorithm == "mpso":
        return cfg.replace(mpso_enabled=True), mpso_bounds
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


@dataclass
class RunSummary:
    algorithm: str
    seed: int
    best_cost: float
    best_position: np.ndarray
    trace: np.ndarray
    mean_trace: np.ndarray
    elapsed: float


def optimize(algorithm: str, seed: int, cfg: SwarmConfig, scenario: Scenario = NOMINAL,
             objective=None, mpso_bounds: Bounds = MPSO_BOUNDS,
             pso_bounds: Bounds = UNIFORM_BOUNDS) -> tuple[RunSummary, SwarmResult]:
    """One seeded optimiser run on the tracking objective."""
    run_cfg, bounds = algorithm_setup(algorithm, cfg.replace(seed=seed), mpso_bounds, pso_bounds)
    objective = NominalObjective(scenario) if objective is None else objective
    start = time.perf_counter()
    result = run_swarm(objective, run_cfg, bounds)
    elapsed = time.perf_counter() - start
    summary = RunSummary(algorithm, int(seed), float(result.best_cost), result.best_position.copy(),
                         result.trace.copy(), result.mean_trace.copy(), elapsed)
    return summary, result


def _optimize_job(args) -> RunSummary:
    return optimize(*args)[0]


@dataclass
class CampaignResult:
    """Final costs, traces and timings per algorithm, indexed like ``seeds``."""

    algorithms: tuple
    seeds: tuple
    config: dict = field(default_factory=dict)
    runs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        self.seeds = tuple(int(s) for s in self.seeds)
        for a in self.algorithms:
            self.runs.setdefault(a, [])

    def add(self, run: RunSummary) -> None:
        self.runs[run.algorithm].append(run)

    def check(self) -> None:
        counts = {a: len(self.runs[a]) for a in self.algorithms}
        if len(set(counts.values())) > 1:
            raise ValueError(f"unequal run counts per algorithm: {counts}")

    def costs(self, algorithm: str) -> np.ndarray:
        return np.array([r.best_cost for r in self.runs[algorithm]])

    def traces(self, algorithm: str) -> list:
        return [r.trace for r in self.runs[algorithm]]

    def elapsed(self, algorithm: str) -> np.ndarray:
        return np.array([r.elapsed for r in self.runs[algorithm]])

    def best_run(self, algorithm: str) -> RunSummary:
        runs = self.runs[algorithm]
        if not runs:
            raise ValueError(f"no runs recorded for {algorithm!r}")
        return min(runs, key=lambda r: (r.best_cost, r.seed))

    def summary_rows(self) -> list:
        rows = []
        for a in self.algorithms:
            c = self.costs(a)
            if c.size == 0:
                continue
            rows.append([a, c.size, float(c.min()), float(c.mean()), float(np.median(c)),
                         float(c.std()), float(c.max()), self.best_run(a).seed])
        return rows

    def to_dict(self) -> dict:
        return {
            "algorithms": list(self.algorithms),
            "seeds": list(self.seeds),
            "config": self.config,
            "runs": {
                a: [{"seed": r.seed, "best_cost": r.best_cost,
                     "best_position": r.best_position.tolist(), "trace": r.trace.tolist(),
                     "mean_trace": r.mean_trace.tolist(), "elapsed": r.elapsed}
                    for r in self.runs[a]]
                for a in self.algorithms
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignResult":
        out = cls(data["algorithms"], data["seeds"], data.get("config", {}))
        for a, runs in data["runs"].items():
            for r in runs:
                out.add(RunSummary(a, r["seed"], r["best_cost"], np.array(r["best_position"]),
                                   np.array(r["trace"]), np.array(r["mean_trace"]), r["elapsed"]))
        out.check()
        return out

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "CampaignResult":
        return cls.from_dict(json.loads(Path(path).read_text()))


def run_campaign(algorithms, seeds, cfg: SwarmConfig, scenario: Scenario = NOMINAL,
                 workers: int = 1, mpso_bounds: Bounds = MPSO_BOUNDS,
                 pso_bounds: Bounds = UNIFORM_BOUNDS, progress=None) -> CampaignResult:
    """Run each algorithm once per seed.

    With ``workers > 1`` runs go to a process pool.  Results are gathered in
    submission order, so the outcome does not depend on the worker count.
    ``progress(run)`` is called as each run is collected.
    """
    algorithms = tuple(algorithms)
    for a in algorithms:
        algorithm_setup(a, cfg)
    jobs = [(a, s, cfg, scenario, None, mpso_bounds, pso_bounds) for a in algorithms for s in seeds]
    result = CampaignResult(algorithms, seeds, config=_config_dict(cfg, scenario))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = pool.map(_optimize_job, jobs)
            for r in summaries:
                result.add(r)
                if progress is not None:
                    progress(r)
    else:
        for job in jobs:
            r = _optimize_job(job)
            result.add(r)
            if progress is not None:
                progress(r)
    result.check()
    return result


def _config_dict(cfg: SwarmConfig, scenario: Scenario) -> dict:
    return {"population": cfg.population, "iterations": cfg.iterations, "w0": cfg.w0,
            "w_decay": cfg.w_decay, "c1": cfg.c1, "c2": cfg.c2,
            "elim_percent": cfg.elim_percent, "elim_period": cfg.elim_period,
            "saturation_percent": cfg.saturation_percent, "scenario": scenario.label}


def compare(result: CampaignResult, first: str = "mpso", second: str = "pso",
            pairing: str = "seed") -> dict:
    """Wilcoxon test between two algorithms and Friedman mean ranks.

    ``pairing="seed"`` pairs final costs run by run.  ``pairing="iteration"``
    pairs best-so-far costs at every iteration of every run, which gives a
    much larger sample.
    """
    if pairing == "seed":
        a, b = result.costs(first), result.costs(second)
    elif pairing == "iteration":
        a = np.concatenate(result.traces(first)) if result.runs[first] else np.array([])
        b = np.concatenate(result.traces(second)) if result.runs[second] else np.array([])
    else:
        raise ValueError(f"unknown pairing {pairing!r}")
    test = wilcoxon_signed_rank(a, b)
    matrix = np.column_stack([result.costs(alg) for alg in result.algorithms])
    ranks = friedman_ranks(matrix)
    return {
        "pairing": pairing,
        "pair": (first, second),
        "statistic": test.statistic,
        "pvalue": test.pvalue,
        "n": test.n,
        "method": test.method,
        "friedman": dict(zip(result.algorithms, (float(r) for r in ranks))),
    }


# --- plot data -----------------------------------------------------------


def _write_rows(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _fmt(x):
    return repr(float(x)) if isinstance(x, (float, np.floating)) else x


def emit_run(run: RunRecord, out_dir, algorithm: str = "", seed=None) -> list:
    """Outputs, errors and control signals of one run as three CSVs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = "_".join(x for x in (run.label, algorithm or run.controller,
                                "" if seed is None else f"seed{seed}") if x)
    t = run.t[:, None]
    outputs = np.hstack([t, run.state[:, :3], run.desired])
    errors = np.hstack([t, run.errors, run.error_rates])
    controls = np.hstack([t, run.controls])
    files = []
    for kind, header, data in (
        ("outputs", ["t", "roll", "pitch", "yaw", "roll_d", "pitch_d", "yaw_d"], outputs),
        ("errors", ["t", "e_roll", "e_pitch", "e_yaw", "de_roll", "de_pitch", "de_yaw"], errors),
        ("controls", ["t", "v1", "v2", "u1", "u2"], controls),
    ):
        path = out_dir / f"{stem}_{kind}.csv"
        np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt="%.10g")
        files.append(path)
    return files


def emit_trace(trace, out_dir, algorithm: str, seed, scenario: str = "nominal",
               mean_trace=None) -> Path:
    """RMSE evolution of one optimiser run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace = np.asarray(trace, dtype=float)
    mean = np.full(trace.shape, np.nan) if mean_trace is None else np.asarray(mean_trace, float)
    rows = [[i, _fmt(b), _fmt(m)] for i, (b, m) in enumerate(zip(trace, mean))]
    return _write_rows(out_dir / f"{scenario}_{algorithm}_seed{seed}_trace.csv",
                       ["iteration", "best_cost", "mean_cost"], rows)


def emit_campaign(result: CampaignResult, out_dir, scenario: str = "nominal") -> list:
    """One trace CSV per algorithm and seed, a summary CSV and a timing CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for a in result.algorithms:
        for r in result.runs[a]:
            files.append(emit_trace(r.trace, out_dir, a, r.seed, scenario, r.mean_trace))
    rows = [[_fmt(x) for x in row] for row in result.summary_rows()]
    files.append(_write_rows(out_dir / f"{scenario}_summary.csv", SUMMARY_HEADER, rows))
    timing = [[a, r.seed, _fmt(r.elapsed)] for a in result.algorithms for r in result.runs[a]]
    files.append(_write_rows(out_dir / f"{scenario}_timing.csv",
                             ["algorithm", "seed", "elapsed_s"], timing))
    return files


def emit_plot_data(obj, out_dir, kind: str | None = None, **names) -> list:
    """Write plot data for a run record, an optimiser result or a campaign.

    ``kind`` is ``"run"``, ``"trace"`` or ``"campaign"`` and is inferred from
    the object type when omitted.  Extra keywords (``algorithm``, ``seed``,
    ``scenario``) end up in the file names.
    """
    if kind is None:
        if isinstance(obj, RunRecord):
            kind = "run"
        elif isinstance(obj, CampaignResult):
            kind = "campaign"
        elif isinstance(obj, (SwarmResult, RunSummary)):
            kind = "trace"
        else:
            raise TypeError(f"cannot infer plot-data kind for {type(obj).__name__}")
    if kind == "run":
        return emit_run(obj, out_dir, names.get("algorithm", ""), names.get("seed"))
    if kind == "trace":
        seed = names.get("seed", getattr(obj, "seed", 0))
        algorithm = names.get("algorithm", getattr(obj, "algorithm", "swarm"))
        return [emit_trace(obj.trace, out_dir, algorithm, seed, names.get("scenario", "nominal"),
                           getattr(obj, "mean_trace", None))]
    if kind == "campaign":
        return emit_campaign(obj, out_dir, names.get("scenario", "nominal"))
    raise ValueError(f"unknown plot-data kind {kind!r}")
