"""Command-line front end.

Exit codes: 0 success, 2 bad configuration or arguments, 3 numerical failure
(an unstable closed loop or an undefined statistic).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from heliopt import campaign as cmp
from heliopt.config import ConfigError, RunConfig, default_config_text, load_config
from heliopt.dynamics import NumericalBlowUp
from heliopt.experiments import (
    DESK_TUNED, N_PARAMS, PARAMETER_NAMES, SCENARIOS, PUBLISHED, decode, simulate, summary_text,
    write_run_csv,
)
from heliopt.stats import UndefinedTestError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


PRESETS = {"desk": DESK_TUNED, **PUBLISHED}


def _load_vector(source: str) -> np.ndarray:
    """Parameter vector from a named preset or a file (.npy, .json, or text)."""
    if source in PRESETS:
        return PRESETS[source].copy()
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"no preset or file named {source!r}; presets: {sorted(PRESETS)}")
    if path.suffix == ".npy":
        vec = np.load(path)
    elif path.suffix == ".json":
        data = json.loads(path.read_text())
        vec = np.asarray(data["best_position"] if isinstance(data, dict) else data, dtype=float)
    else:
        vec = np.loadtxt(path, delimiter=",", ndmin=1)
    vec = np.asarray(vec, dtype=float).ravel()
    if vec.size != N_PARAMS:
        raise ConfigError(f"{source}: expected {N_PARAMS} values, found {vec.size}")
    return vec


def _seeds(text: str) -> list:
    """'5' means seeds 0..4; '3,7,11' is an explicit list."""
    try:
        if "," in text:
            return [int(s) for s in text.split(",") if s.strip()]
        return list(range(int(text)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def _swarm_cfg(cfg: RunConfig, args):
    changes = {"seed": args.seed}
    if getattr(args, "population", None) is not None:
        changes["population"] = args.population
    if getattr(args, "iterations", None) is not None:
        changes["iterations"] = args.iterations
    try:
        return cfg.swarm.replace(**changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_simulate(cfg: RunConfig, args) -> int:
    scenario = SCENARIOS[args.scenario] if args.scenario else cfg.scenario
    if args.controller == "pid":
        controller = cfg.pid_controller()
        name = "pid"
    else:
        vec = _load_vector(args.params)
        try:
            controller = decode(vec, cfg.model)
        except ValueError as exc:
            raise ConfigError(f"cannot build controller: {exc}") from None
        name = args.params if args.params in PRESETS else Path(args.params).stem
    run = simulate(scenario, controller, cfg.model, label=name, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{scenario.label}_{name}"
    write_run_csv(run, out / f"{stem}_run.csv")
    cmp.emit_plot_data(run, out, algorithm=name)
    text = summary_text(run)
    (out / f"{stem}_summary.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if run.stable else EXIT_NUMERICAL


def cmd_optimize(cfg: RunConfig, args) -> int:
    swarm_cfg = _swarm_cfg(cfg, args)
    summary, _ = cmp.optimize(args.algorithm, args.seed, swarm_cfg, cfg.scenario,
                              mpso_bounds=cfg.mpso_bounds, pso_bounds=cfg.pso_bounds)
    out = Path(args.out)
    cmp.emit_plot_data(summary, out, scenario=cfg.scenario.label)
    best = {"algorithm": args.algorithm, "seed": args.seed, "best_cost": summary.best_cost,
            "best_position": summary.best_position.tolist(),
            "names": list(PARAMETER_NAMES)}
    path = out / f"{cfg.scenario.label}_{args.algorithm}_seed{args.seed}_best.json"
    path.write_text(json.dumps(best, indent=1))
    print(f"algorithm = {args.algorithm}\nseed = {args.seed}\nbest_cost = {summary.best_cost!r}")
    print(f"elapsed_s = {summary.elapsed:.1f}\nbest = {path}")
    return EXIT_OK if summary.best_cost < 1e6 else EXIT_NUMERICAL


def cmd_campaign(cfg: RunConfig, args) -> int:
    swarm_cfg = _swarm_cfg(cfg, args)
    seeds = [args.seed + s for s in args.seeds]
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    for a in algorithms:
        if a not in cmp.ALGORITHMS:
            raise ConfigError(f"unknown algorithm {a!r}; choose from {cmp.ALGORITHMS}")

    def progress(r):
        print(f"{r.algorithm} seed={r.seed} best={r.best_cost:.6g} ({r.elapsed:.1f} s)",
              file=sys.stderr, flush=True)

    result = cmp.run_campaign(algorithms, seeds, swarm_cfg, cfg.scenario, workers=args.workers,
                              mpso_bounds=cfg.mpso_bounds, pso_bounds=cfg.pso_bounds,
                              progress=progress)
    out = Path(args.out)
    cmp.emit_plot_data(result, out, scenario=cfg.scenario.label)
    result.save(out / "campaign.json")
    for row in result.summary_rows():
        a, n, best, mean, median = row[:5]
        print(f"{a}: runs={n} best={best:.6g} mean={mean:.6g} median={median:.6g}")
    return EXIT_OK


def cmd_stats(cfg: RunConfig, args) -> int:
    try:
        result = cmp.CampaignResult.load(args.campaign)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load campaign {args.campaign}: {exc}") from None
    first, second = args.pair.split(",") if args.pair else ("mpso", "pso")
    for a in (first, second):
        if a not in result.algorithms:
            raise ConfigError(f"campaign has no algorithm {a!r}")
    try:
        res = cmp.compare(result, first, second, pairing=args.pairing)
    except UndefinedTestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        raise ConfigError(f"campaign unsuitable for testing: {exc}") from None
    lines = [f"pairing = {res['pairing']}", f"pair = {first},{second}",
             f"n = {res['n']}", f"method = {res['method']}",
             f"statistic = {res['statistic']!r}", f"pvalue = {res['pvalue']!r}"]
    lines += [f"friedman_{a} = {r!r}" for a, r in res["friedman"].items()]
    text = "\n".join(lines) + "\n"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"stats_{args.pairing}.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_config(cfg: RunConfig, args) -> int:
    sys.stdout.write(default_config_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heliopt", description="Helicopter fuzzy control simulation and swarm tuning.")
    parser.add_argument("--config", help="INI configuration file")
    parser.add_argument("--out", default="results", help="output directory (default: results)")
    parser.add_argument("--seed", type=int, default=0, help="base random seed (default: 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario with one controller")
    p.add_argument("--controller", choices=("fuzzy", "pid"), default="fuzzy")
    p.add_argument("--params", default="desk",
                   help="fuzzy parameters: preset (desk, mpso, pso) or .npy/.json/.csv file")
    p.add_argument("--scenario", choices=sorted(SCENARIOS),
                   help="scenario (default: from config, else nominal)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="tune the fuzzy controller with one algorithm")
    p.add_argument("--algorithm", choices=cmp.ALGORITHMS, default="mpso")
    p.add_argument("--population", type=int)
    p.add_argument("--iterations", type=int)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("campaign", help="compare algorithms over several seeds")
    p.add_argument("--algorithms", default="pso,mpso")
    p.add_argument("--seeds", type=_seeds, default=_seeds("25"),
                   help="count N (seeds 0..N-1) or a comma list, offset by --seed")
    p.add_argument("--population", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("stats", help="Wilcoxon and Friedman tests over a campaign file")
    p.add_argument("campaign", help="campaign.json written by the campaign command")
    p.add_argument("--pairing", choices=("seed", "iteration"), default="seed")
    p.add_argument("--pair", help="two algorithms, e.g. mpso,pso")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("config", help="print the default configuration")
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalBlowUp, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
