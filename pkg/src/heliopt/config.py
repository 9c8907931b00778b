"""INI-style run configuration.

Every section is optional; missing keys keep the library defaults.

.. code-block:: ini

    [model]
    m_heli = 1.426          ; any ModelParams field

    [scenario]
    name = nominal          ; nominal, half-mass, heavy, disturbed
    horizon = 20
    dt = 0.001
    roll_envelope = false

    [swarm]
    population = 30         ; any SwarmConfig field except mpso_enabled
    iterations = 500

    [pid.roll]              ; also pid.yaw and pid.pitch
    kp = 3
    ki = 1
    kd = 5
    integral_limit = 0.5

    [bounds]
    output_gain = 0, 200    ; MPSO box per parameter group
    pd_gain = 0, 100
    gamma = 0, 100
    centers = 0, 10
    pso = 0, 200            ; plain PSO box, same for every parameter
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

import numpy as np

from heliopt.dynamics import ModelParams
from heliopt.experiments import (
    CENTERS_ERROR, CENTERS_ERROR_RATE, GAMMA_PITCH, GAMMA_ROLL_YAW, N_PARAMS, OUTPUT_GAINS,
    PD_GAINS, SCENARIOS, MPSO_BOUNDS, UNIFORM_BOUNDS, Scenario,
)
from heliopt.pid import DEFAULT_GAINS, PidController, PidGains
from heliopt.swarm import Bounds, SwarmConfig


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


_BOUND_GROUPS = {
    "output_gain": (OUTPUT_GAINS,),
    "pd_gain": (PD_GAINS,),
    "gamma": (GAMMA_ROLL_YAW, GAMMA_PITCH),
    "centers": (CENTERS_ERROR, CENTERS_ERROR_RATE),
}


@dataclass
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    scenario: Scenario = SCENARIOS["nominal"]
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    pid: dict = field(default_factory=lambda: dict(DEFAULT_GAINS))
    mpso_bounds: Bounds = MPSO_BOUNDS
    pso_bounds: Bounds = UNIFORM_BOUNDS

    def pid_controller(self) -> PidController:
        return PidController(roll=self.pid["roll"], yaw=self.pid["yaw"], pitch=self.pid["pitch"])


def _convert(section, key, kind):
    try:
        if kind is bool:
            return section.getboolean(key)
        if kind is int:
            return section.getint(key)
        return section.getfloat(key)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from None


def _typed_fields(cls, section, skip=()):
    types = {f.name: f.type for f in dataclasses.fields(cls) if not f.name.startswith("_")}
    kinds = {"int": int, "float": float, "bool": bool}
    out = {}
    for key in section:
        if key in skip:
            continue
        if key not in types:
            raise ConfigError(f"[{section.name}] unknown key {key!r}")
        out[key] = _convert(section, key, kinds.get(str(types[key]), float))
    return out


def _pair(section, key):
    parts = [p.strip() for p in section[key].split(",")]
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: expected 'low, high'") from None
    if not lo < hi:
        raise ConfigError(f"[{section.name}] {key}: low must be below high")
    return lo, hi


def _build(cls, kwargs, where):
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}] {exc}") from None


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    known = {"model", "scenario", "swarm", "bounds", "pid.roll", "pid.yaw", "pid.pitch"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    cfg = RunConfig()

    if parser.has_section("model"):
        cfg.model = _build(ModelParams, _typed_fields(ModelParams, parser["model"]), "model")

    if parser.has_section("scenario"):
        sec = parser["scenario"]
        name = sec.get("name", "nominal")
        if name not in SCENARIOS:
            raise ConfigError(f"[scenario] unknown name {name!r}; choose from {sorted(SCENARIOS)}")
        changes = {}
        for key in ("horizon", "dt"):
            if key in sec:
                changes[key] = _convert(sec, key, float)
        if "roll_envelope" in sec:
            changes["roll_envelope"] = _convert(sec, "roll_envelope", bool)
        extra = set(sec) - {"name", "horizon", "dt", "roll_envelope"}
        if extra:
            raise ConfigError(f"[scenario] unknown key(s): {', '.join(sorted(extra))}")
        try:
            cfg.scenario = dataclasses.replace(SCENARIOS[name], **changes)
        except ValueError as exc:
            raise ConfigError(f"[scenario] {exc}") from None

    if parser.has_section("swarm"):
        if "mpso_enabled" in parser["swarm"]:
            raise ConfigError("[swarm] mpso_enabled is set by the chosen algorithm (pso or mpso)")
        kwargs = _typed_fields(SwarmConfig, parser["swarm"])
        cfg.swarm = _build(SwarmConfig, kwargs, "swarm")

    for axis in ("roll", "yaw", "pitch"):
        name = f"pid.{axis}"
        if parser.has_section(name):
            base = dataclasses.asdict(DEFAULT_GAINS[axis])
            base.update(_typed_fields(PidGains, parser[name]))
            cfg.pid[axis] = _build(PidGains, base, name)

    if parser.has_section("bounds"):
        sec = parser["bounds"]
        lo, hi = MPSO_BOUNDS.lower.copy(), MPSO_BOUNDS.upper.copy()
        for key in sec:
            if key == "pso":
                a, b = _pair(sec, key)
                cfg.pso_bounds = Bounds.uniform(a, b, N_PARAMS)
            elif key in _BOUND_GROUPS:
                a, b = _pair(sec, key)
                for sl in _BOUND_GROUPS[key]:
                    lo[sl], hi[sl] = a, b
            else:
                raise ConfigError(f"[bounds] unknown key {key!r}")
        cfg.mpso_bounds = Bounds(lo, hi)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None


def default_config_text() -> str:
    """Defaults rendered as a config file."""
    cfg = RunConfig()
    lines = ["[model]"]
    lines += [f"{k} = {v!r}" for k, v in dataclasses.asdict(cfg.model).items()]
    lines += ["", "[scenario]", "name = nominal", f"horizon = {cfg.scenario.horizon!r}",
              f"dt = {cfg.scenario.dt!r}", "roll_envelope = false", "", "[swarm]"]
    for k, v in dataclasses.asdict(cfg.swarm).items():
        if k in ("seed", "mpso_enabled"):
            continue
        lines.append(f"{k} = {str(v).lower() if isinstance(v, bool) else repr(v)}")
    for axis in ("roll", "yaw", "pitch"):
        lines += ["", f"[pid.{axis}]"]
        lines += [f"{k} = {v!r}" for k, v in dataclasses.asdict(cfg.pid[axis]).items()]
    lines += ["", "[bounds]"]
    for key, slices in _BOUND_GROUPS.items():
        sl = slices[0]
        lo, hi = float(cfg.mpso_bounds.lower[sl][0]), float(cfg.mpso_bounds.upper[sl][0])
        lines.append(f"{key} = {lo!r}, {hi!r}")
    lines.append(f"pso = {float(np.min(cfg.pso_bounds.lower))!r}, "
                 f"{float(np.max(cfg.pso_bounds.upper))!r}")
    return "\n".join(lines) + "\n"
