import numpy as np
import pytest

from heliopt.experiments import NOMINAL, simulate
from heliopt.pid import DEFAULT_GAINS, PidController, PidGains, pid_step


def test_gain_validation():
    with pytest.raises(ValueError):
        PidGains(kp=-1.0)
    with pytest.raises(ValueError):
        PidGains(integral_limit=0.0)


def test_proportional_and_derivative():
    u, i = pid_step(PidGains(kp=2.0, kd=0.5), 1.0, 4.0, 0.0, 1e-3)
    assert u == pytest.approx(4.0) and i == pytest.approx(1e-3)


def test_trapezoid_integral():
    g = PidGains(ki=1.0, integral_limit=10.0)
    _, i = pid_step(g, 2.0, 0.0, 0.0, 0.1, e_prev=1.0)
    assert i == pytest.approx(0.15)


def test_integral_clamped():
    g = PidGains(ki=1.0, integral_limit=0.2)
    u, i = pid_step(g, 100.0, 0.0, 0.0, 1.0)
    assert i == 0.2 and u == pytest.approx(0.2)
    _, i = pid_step(g, -100.0, 0.0, 0.0, 1.0)
    assert i == -0.2


def test_default_baseline_tracks_reference():
    run = simulate(NOMINAL, PidController())
    tail = run.window(15.0)
    assert run.stable
    assert np.max(np.abs(run.errors[tail][:, [0, 2]])) < 0.02


def test_controller_state_resets():
    ctrl = PidController()
    ctrl.step(np.zeros(6), (0.5, 0.0, 0.5, 0.0), 1e-3)
    assert np.any(ctrl._state != 0)
    ctrl.reset()
    assert np.all(ctrl._state == 0)


def test_defaults_are_configurable():
    ctrl = PidController(roll=PidGains(kp=1.0))
    assert ctrl.gains_array()[0, 0] == 1.0
    assert ctrl.gains_array()[2, 0] == DEFAULT_GAINS["pitch"].kp
