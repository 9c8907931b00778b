import numpy as np
import pytest

from heliopt.config import ConfigError, RunConfig, default_config_text, load_config, parse_config
from heliopt.experiments import MPSO_BOUNDS


def test_defaults_round_trip():
    cfg = parse_config(default_config_text())
    ref = RunConfig()
    assert cfg.model == ref.model and cfg.swarm == ref.swarm and cfg.pid == ref.pid
    assert np.array_equal(cfg.mpso_bounds.upper, MPSO_BOUNDS.upper)


def test_overrides():
    cfg = parse_config("""
[model]
m_heli = 2.0
[scenario]
name = heavy
horizon = 5
[swarm]
population = 12
iterations = 40
[pid.pitch]
kd = 3.5
[bounds]
gamma = 0, 50
pso = -1, 1
""")
    assert cfg.model.m_heli == 2.0
    assert cfg.scenario.mass_scale == 1.5 and cfg.scenario.horizon == 5.0
    assert cfg.swarm.population == 12 and cfg.swarm.iterations == 40
    assert cfg.pid["pitch"].kd == 3.5 and cfg.pid["pitch"].kp == 50.0
    assert cfg.mpso_bounds.upper[5] == 50 and cfg.mpso_bounds.upper[0] == 200
    assert cfg.pso_bounds.lower[0] == -1


@pytest.mark.parametrize("text", [
    "[swarm]\npopulation = x",
    "[nope]\na = 1",
    "[swarm]\nbogus = 3",
    "[swarm]\nmpso_enabled = false",
    "[scenario]\nname = lunar",
    "[bounds]\ngamma = 5, 1",
    "[bounds]\ngamma = 5",
    "[model]\ng = -1",
    "not an ini file",
])
def test_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")
