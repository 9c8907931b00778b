"""Parallel-form PID loops used as the comparison baseline."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from heliopt.decoupling import _collective, _desired_pitch
from heliopt.dynamics import PITCH_LIMITS, NumericalBlowUp
from heliopt.fuzzy import ControlSignals


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    integral_limit: float = 1.0

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("PID gains must be non-negative")
        if not self.integral_limit > 0:
            raise ValueError("integral_limit must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.kp, self.ki, self.kd, self.integral_limit])


# Desk-tuned on the nominal scenario; see README for the tuning targets.
DEFAULT_GAINS = {
    "roll": PidGains(kp=3.0, ki=1.0, kd=5.0, integral_limit=0.5),
    "yaw": PidGains(kp=3.0, ki=1.0, kd=5.0, integral_limit=0.5),
    "pitch": PidGains(kp=50.0, ki=0.0, kd=2.0, integral_limit=1.0),
}


def pid_step(gains: PidGains, e: float, e_dot: float, integral_state: float, dt: float,
             e_prev: float | None = None) -> tuple[float, float]:
    """Return ``(u, integral)`` after integrating ``e`` over one step.

    The integral uses the trapezoid rule against ``e_prev`` (rectangle on
    the first step) and is clamped to ``+-integral_limit``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    prev = e if e_prev is None else e_prev
    return _pid(gains.as_array(), float(e), float(e_dot), float(integral_state), float(prev),
                float(dt))


@dataclass
class PidController:
    roll: PidGains = DEFAULT_GAINS["roll"]
    yaw: PidGains = DEFAULT_GAINS["yaw"]
    pitch: PidGains = DEFAULT_GAINS["pitch"]
    pitch_limits: tuple = PITCH_LIMITS
    # rows roll, yaw, pitch; columns integral, previous error, has-previous
    _state: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)), repr=False)
    _memory: np.ndarray = field(default_factory=lambda: np.zeros(2), repr=False)

    def gains_array(self) -> np.ndarray:
        return np.stack([self.roll.as_array(), self.yaw.as_array(), self.pitch.as_array()])

    def reset(self):
        self._state[:] = 0.0
        self._memory[:] = 0.0

    def step(self, state, reference, dt: float) -> ControlSignals:
        return pid_controller_step(self, state, reference, dt)


def pid_controller_step(ctrl: PidController, state, reference, dt: float) -> ControlSignals:
    if not dt > 0:
        raise ValueError("dt must be positive")
    sig = np.empty(11)
    _pid_control(np.asarray(state, dtype=float), np.asarray(reference, dtype=float),
                 ctrl.gains_array(), ctrl._state, ctrl._memory, float(dt),
                 ctrl.pitch_limits[0], ctrl.pitch_limits[1], sig)
    if not np.all(np.isfinite(sig)):
        raise NumericalBlowUp("PID controller produced non-finite output")
    return ControlSignals(*(float(v) for v in sig))


@njit(cache=True)
def _pid(g, e, e_dot, integral, e_prev, dt):
    integral += 0.5 * dt * (e + e_prev)
    if integral > g[3]:
        integral = g[3]
    elif integral < -g[3]:
        integral = -g[3]
    return g[0] * e + g[1] * integral + g[2] * e_dot, integral


@njit(cache=True)
def _pid_loop(j, e, e_dot, gains, state, dt):
    # PID acts on reference minus measurement
    prev = -e if state[j, 2] == 0.0 else state[j, 1]
    u, state[j, 0] = _pid(gains[j], -e, -e_dot, state[j, 0], prev, dt)
    state[j, 1] = -e
    state[j, 2] = 1.0
    return u


@njit(cache=True)
def _pid_control(x, ref, gains, state, memory, dt, pitch_lo, pitch_hi, sig):
    e_r = x[0] - ref[0]
    ed_r = x[3] - ref[1]
    e_y = x[2] - ref[2]
    ed_y = x[5] - ref[3]
    v1 = _pid_loop(0, e_r, ed_r, gains, state, dt)
    v2 = _pid_loop(1, e_y, ed_y, gains, state, dt)
    theta_d = _desired_pitch(v1, v2, x[0], pitch_lo, pitch_hi)
    u1 = _collective(v1, v2, x[0])
    theta_d_rate = (theta_d - memory[1]) / dt if memory[0] > 0.0 else 0.0
    memory[0] = 1.0
    memory[1] = theta_d
    e_t = x[1] - theta_d
    ed_t = x[4] - theta_d_rate
    u2 = _pid_loop(2, e_t, ed_t, gains, state, dt)
    sig[0] = e_r
    sig[1] = ed_r
    sig[2] = e_y
    sig[3] = ed_y
    sig[4] = e_t
    sig[5] = ed_t
    sig[6] = v1
    sig[7] = v2
    sig[8] = u1
    sig[9] = u2
    sig[10] = theta_d
