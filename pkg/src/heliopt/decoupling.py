"""Virtual-input decoupling between the roll/yaw channels and ``(u1, pitch)``."""
from __future__ import annotations

import math
from typing import NamedTuple

from numba import njit

from heliopt.dynamics import PITCH_LIMITS


class VirtualInputs(NamedTuple):
    v1: float
    v2: float


def actual_to_virtual(u1: float, pitch: float, roll: float) -> VirtualInputs:
    v1, v2 = _to_virtual(float(u1), float(pitch), float(roll))
    return VirtualInputs(v1, v2)


def desired_pitch(v: VirtualInputs, roll: float, limits=PITCH_LIMITS) -> float:
    """Pitch angle that realises ``v`` together with :func:`collective_input`.

    The branch is chosen so that ``|pitch| < 90 deg`` and ``u1`` carries the
    sign of ``v1``; the result is clamped to the pitch envelope.
    """
    return _desired_pitch(float(v[0]), float(v[1]), float(roll), limits[0], limits[1])


def collective_input(v: VirtualInputs, roll: float) -> float:
    return _collective(float(v[0]), float(v[1]), float(roll))


@njit(cache=True)
def _to_virtual(u1, pitch, roll):
    return math.cos(pitch) * u1, math.cos(roll) * math.sin(pitch) * u1


@njit(cache=True)
def _desired_pitch(v1, v2, roll, lo, hi):
    # atan(v2 / (cos(roll) v1)) without the v1 = 0 singularity
    s = -1.0 if v1 < 0.0 else 1.0
    theta = math.atan2(s * v2, math.cos(roll) * abs(v1))
    if theta > hi:
        return hi
    if theta < lo:
        return lo
    return theta


@njit(cache=True)
def _collective(v1, v2, roll):
    if v1 > 0.0:
        s = 1.0
    elif v1 < 0.0:
        s = -1.0
    elif v2 > 0.0:
        s = 1.0
    elif v2 < 0.0:
        s = -1.0
    else:
        return 0.0
    b = v2 / math.cos(roll)
    return s * math.sqrt(v1 * v1 + b * b)
