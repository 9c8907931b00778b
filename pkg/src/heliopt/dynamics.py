"""Nonlinear 3-DOF helicopter plant.

State vectors are ordered ``(roll, pitch, yaw, roll_rate, pitch_rate,
yaw_rate)``.  The numba kernels at the bottom of the module are what the
closed-loop simulator calls; the public functions wrap them for
interactive use.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

ROLL, PITCH, YAW, ROLL_RATE, PITCH_RATE, YAW_RATE = range(6)

PITCH_LIMITS = (math.radians(-45.0), math.radians(45.0))
ROLL_LIMITS = (math.radians(-27.5), math.radians(30.0))


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the bench helicopter (SI units)."""

    m_heli: float = 1.426
    m_counter: float = 1.870
    l_a: float = 0.660
    l_w: float = 0.470
    l_h: float = 0.178
    j_roll: float = 1.0348
    j_pitch: float = 0.0451
    j_yaw: float = 1.0348
    g: float = 9.81

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{field.name} must be positive and finite, got {value!r}")

    def as_array(self) -> np.ndarray:
        return np.array(dataclasses.astuple(self), dtype=np.float64)

    def with_mass_scale(self, factor: float) -> "ModelParams":
        """Copy with the helicopter body mass multiplied by ``factor``."""
        return dataclasses.replace(self, m_heli=self.m_heli * factor)


class HelicopterState(NamedTuple):
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    roll_rate: float = 0.0
    pitch_rate: float = 0.0
    yaw_rate: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array(self, dtype=np.float64)

    @classmethod
    def from_array(cls, x) -> "HelicopterState":
        return cls(*(float(v) for v in x))


class ControlInputs(NamedTuple):
    """Collective (``u1 = F_f + F_b``) and differential (``u2 = F_f - F_b``) force."""

    u1: float = 0.0
    u2: float = 0.0


class NumericalBlowUp(ArithmeticError):
    """Raised when an integration step produces a non-finite state."""


def limits_array(pitch_limits=PITCH_LIMITS, roll_limits=ROLL_LIMITS) -> np.ndarray:
    """Pack angle limits for the kernels; ``None`` disables a limit pair."""
    pitch_limits = (-math.inf, math.inf) if pitch_limits is None else pitch_limits
    roll_limits = (-math.inf, math.inf) if roll_limits is None else roll_limits
    return np.array([*pitch_limits, *roll_limits], dtype=np.float64)


DEFAULT_LIMITS = limits_array()
_NO_OFFSET = np.zeros(3)


def gravity_roll_torque(p: ModelParams, roll: float) -> float:
    return _gravity_torque(p.as_array(), float(roll))


def state_derivative(s, u: ControlInputs, p: ModelParams) -> np.ndarray:
    """Time derivative of the state for constant force inputs."""
    x = np.asarray(s, dtype=np.float64)
    return _derivative(x, float(u[0]), float(u[1]), p.as_array(), _NO_OFFSET)


def clamp_angles(s, pitch_limits=PITCH_LIMITS, roll_limits=ROLL_LIMITS) -> HelicopterState:
    """Saturate pitch and roll at the mechanical stops.

    A rate pointing further out of range is zeroed at the stop.  Yaw is
    unconstrained.
    """
    x = np.array(s, dtype=np.float64)
    _clamp(x, limits_array(pitch_limits, roll_limits))
    return HelicopterState.from_array(x)


def step(s, u: ControlInputs, p: ModelParams, dt: float,
         pitch_limits=PITCH_LIMITS, roll_limits=ROLL_LIMITS) -> HelicopterState:
    """Advance one classical RK4 step with ``u`` held over the step, then clamp."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = _rk4_step(np.asarray(s, dtype=np.float64), float(u[0]), float(u[1]),
                  p.as_array(), _NO_OFFSET, float(dt), limits_array(pitch_limits, roll_limits))
    if not np.all(np.isfinite(x)):
        raise NumericalBlowUp(f"non-finite state after step: {x}")
    return HelicopterState.from_array(x)


# --- kernels -------------------------------------------------------------
# p layout: m_heli, m_counter, l_a, l_w, l_h, j_roll, j_pitch, j_yaw, g
# limits layout: pitch_lo, pitch_hi, roll_lo, roll_hi


@njit(cache=True)
def _gravity_torque(p, roll):
    return p[8] * (p[0] * p[2] - p[1] * p[3]) * math.cos(roll)


@njit(cache=True)
def _accel(roll, pitch, u1, u2, p, offset):
    thrust = p[2] * u1
    return ((_gravity_torque(p, roll) + thrust * math.cos(pitch)) / p[5] + offset[0],
            p[4] * u2 / p[6] + offset[1],
            thrust * math.cos(roll) * math.sin(pitch) / p[7] + offset[2])


@njit(cache=True)
def _derivative(x, u1, u2, p, offset):
    dx = np.empty(6)
    dx[0] = x[3]
    dx[1] = x[4]
    dx[2] = x[5]
    dx[3], dx[4], dx[5] = _accel(x[0], x[1], u1, u2, p, offset)
    return dx


@njit(cache=True)
def _clamp(x, limits):
    if x[1] > limits[1]:
        x[1] = limits[1]
        if x[4] > 0.0:
            x[4] = 0.0
    elif x[1] < limits[0]:
        x[1] = limits[0]
        if x[4] < 0.0:
            x[4] = 0.0
    if x[0] > limits[3]:
        x[0] = limits[3]
        if x[3] > 0.0:
            x[3] = 0.0
    elif x[0] < limits[2]:
        x[0] = limits[2]
        if x[3] < 0.0:
            x[3] = 0.0


@njit(cache=True)
def _rk4_step(x, u1, u2, p, offset, dt, limits):
    # accelerations depend on the angles only, so stages are kept as scalars
    h = 0.5 * dt
    r0, t0, y0, wr0, wt0, wy0 = x[0], x[1], x[2], x[3], x[4], x[5]
    ar1, at1, ay1 = _accel(r0, t0, u1, u2, p, offset)
    wr2, wt2, wy2 = wr0 + h * ar1, wt0 + h * at1, wy0 + h * ay1
    ar2, at2, ay2 = _accel(r0 + h * wr0, t0 + h * wt0, u1, u2, p, offset)
    wr3, wt3, wy3 = wr0 + h * ar2, wt0 + h * at2, wy0 + h * ay2
    ar3, at3, ay3 = _accel(r0 + h * wr2, t0 + h * wt2, u1, u2, p, offset)
    wr4, wt4, wy4 = wr0 + dt * ar3, wt0 + dt * at3, wy0 + dt * ay3
    ar4, at4, ay4 = _accel(r0 + dt * wr3, t0 + dt * wt3, u1, u2, p, offset)
    c = dt / 6.0
    out = np.empty(6)
    out[0] = r0 + c * (wr0 + 2.0 * wr2 + 2.0 * wr3 + wr4)
    out[1] = t0 + c * (wt0 + 2.0 * wt2 + 2.0 * wt3 + wt4)
    out[2] = y0 + c * (wy0 + 2.0 * wy2 + 2.0 * wy3 + wy4)
    out[3] = wr0 + c * (ar1 + 2.0 * ar2 + 2.0 * ar3 + ar4)
    out[4] = wt0 + c * (at1 + 2.0 * at2 + 2.0 * at3 + at4)
    out[5] = wy0 + c * (ay1 + 2.0 * ay2 + 2.0 * ay3 + ay4)
    _clamp(out, limits)
    return out
