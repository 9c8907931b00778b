"""Adaptive fuzzy control of a 3-DOF helicopter tuned by (modified) PSO."""

from heliopt.dynamics import ControlInputs, HelicopterState, ModelParams
from heliopt.experiments import (NOMINAL, SCENARIOS, Scenario, decode, encode, objective,
                                 simulate, published_vector)
from heliopt.fuzzy import FuzzyController
from heliopt.pid import PidController, PidGains
from heliopt.swarm import Bounds, SwarmConfig
from heliopt.swarm import run as run_swarm

__all__ = [
    "Bounds", "ControlInputs", "FuzzyController", "HelicopterState", "ModelParams", "NOMINAL",
    "PidController", "PidGains", "SCENARIOS", "Scenario", "SwarmConfig", "decode", "encode",
    "objective", "run_swarm", "simulate", "published_vector",
]
__version__ = "0.1.0"
