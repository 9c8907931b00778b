"""Adaptive fuzzy controllers for the roll, yaw and pitch loops.

Each loop is a seven-rule fuzzy system over the tracking error and its
rate.  Rule ``i`` pairs the ``i``-th error membership with the ``i``-th
error-rate membership, so the consequent weight vector has seven entries.
The loop command is the scaled fuzzy output plus a nominal PD term that
realises the error dynamics ``e'' = -kp e - kd e'`` the adaptation law is
built around; the weights then learn what the PD term cannot supply
(gravity, reference acceleration, coupling).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from heliopt.decoupling import _collective, _desired_pitch
from heliopt.dynamics import PITCH_LIMITS, ModelParams, NumericalBlowUp

LABELS = ("NL", "NM", "NS", "Z", "PS", "PM", "PL")
N_RULES = len(LABELS)


@dataclass(frozen=True)
class GaussianMF:
    center: float
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")


def _check_symmetric(mfs, name):
    if len(mfs) != N_RULES:
        raise ValueError(f"{name}: expected {N_RULES} memberships, got {len(mfs)}")
    c = np.array([mf.center for mf in mfs])
    if np.any(np.diff(c) < 0):
        raise ValueError(f"{name}: centers must be nondecreasing in label order")
    if not np.allclose(c, -c[::-1], rtol=0, atol=1e-12):
        raise ValueError(f"{name}: centers must be odd-symmetric about Z")


@dataclass(frozen=True)
class RuleBase:
    mfs_error: tuple
    mfs_error_rate: tuple

    def __post_init__(self):
        _check_symmetric(self.mfs_error, "mfs_error")
        _check_symmetric(self.mfs_error_rate, "mfs_error_rate")

    @classmethod
    def from_negative_centers(cls, error, error_rate, sigma=1.0) -> "RuleBase":
        """Build from the ``(NL, NM, NS)`` centers of each input.

        Only magnitudes matter: the three values are sorted so that
        ``NL <= NM <= NS <= 0`` and mirrored onto the positive labels.
        """
        def mirrored(vals):
            neg = -np.sort(np.abs(np.asarray(vals, dtype=float)))[::-1]
            full = np.concatenate([neg, [0.0], -neg[::-1]])
            return tuple(GaussianMF(float(c), sigma) for c in full)

        return cls(mirrored(error), mirrored(error_rate))

    def centers(self) -> np.ndarray:
        return np.array([[mf.center for mf in self.mfs_error],
                         [mf.center for mf in self.mfs_error_rate]])

    def sigmas(self) -> np.ndarray:
        return np.array([[mf.sigma for mf in self.mfs_error],
                         [mf.sigma for mf in self.mfs_error_rate]])


class TrackingError(NamedTuple):
    e: float
    e_dot: float


def solve_lyapunov(kp: float, kd: float, q=None) -> np.ndarray:
    """Solve ``A^T P + P A = -Q`` for ``A = [[0, 1], [-kp, -kd]]``.

    Closed form of the three scalar equations for symmetric ``P``.
    ``q`` defaults to the identity.
    """
    if not (kp > 0 and kd > 0):
        raise ValueError(f"kp and kd must be positive (A not Hurwitz): kp={kp!r}, kd={kd!r}")
    q = np.eye(2) if q is None else np.asarray(q, dtype=float)
    if q.shape != (2, 2) or not np.allclose(q, q.T):
        raise ValueError("q must be a symmetric 2x2 matrix")
    if np.any(np.linalg.eigvalsh(q) <= 0):
        raise ValueError("q must be positive definite")
    b = q[0, 0] / (2.0 * kp)
    c = (2.0 * b + q[1, 1]) / (2.0 * kd)
    a = kp * c + kd * b - q[0, 1]
    return np.array([[a, b], [b, c]])


@dataclass
class AdaptiveFuzzyLoop:
    """One axis controller; ``weights`` evolve during a run."""

    rulebase: RuleBase
    gamma: np.ndarray
    kp: float
    kd: float
    eta_hat: float
    output_gain: float = 1.0
    weights: np.ndarray = None
    q: np.ndarray = None
    lyap_p: np.ndarray = field(init=False)

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float).copy()
        if self.gamma.shape != (N_RULES,) or np.any(self.gamma < 0):
            raise ValueError("gamma must hold seven non-negative entries")
        if self.weights is None:
            self.weights = np.zeros(N_RULES)
        self.weights = np.asarray(self.weights, dtype=float).copy()
        if not self.eta_hat > 0:
            raise ValueError("eta_hat must be positive")
        self.lyap_p = solve_lyapunov(self.kp, self.kd, self.q)


def mf_value(mf: GaussianMF, x: float) -> float:
    return math.exp(-((x - mf.center) ** 2) / (2.0 * mf.sigma ** 2))


def firing_strengths(rb: RuleBase, err: TrackingError) -> np.ndarray:
    return _firing(rb.centers(), rb.sigmas(), float(err[0]), float(err[1]))


def phi_hat(f) -> np.ndarray:
    return _normalize(np.asarray(f, dtype=float))


def control_output(loop: AdaptiveFuzzyLoop, phi) -> float:
    return loop.output_gain * float(np.dot(phi, loop.weights))


def nominal_control(loop: AdaptiveFuzzyLoop, err: TrackingError) -> float:
    """PD term ``-(kp e + kd e') / eta_hat`` of the loop command."""
    return -(loop.kp * err[0] + loop.kd * err[1]) / loop.eta_hat


def adapt_weights(loop: AdaptiveFuzzyLoop, phi, err: TrackingError, dt: float) -> np.ndarray:
    """One explicit-Euler step of ``W' = -Gamma phi B^T P E``; returns new weights."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    w = loop.weights.copy()
    _adapt(w, loop.gamma, np.asarray(phi, dtype=float), loop.eta_hat, loop.lyap_p,
           float(err[0]), float(err[1]), float(dt))
    if not np.all(np.isfinite(w)):
        raise NumericalBlowUp("adaptive weights became non-finite")
    return w


def eta_values(p: ModelParams) -> tuple:
    """Input gains ``(roll, yaw, pitch)`` of the decoupled plant."""
    return p.l_a / p.j_roll, p.l_a / p.j_yaw, p.l_h / p.j_pitch


class ControlSignals(NamedTuple):
    e_roll: float
    e_roll_dot: float
    e_yaw: float
    e_yaw_dot: float
    e_pitch: float
    e_pitch_dot: float
    v1: float
    v2: float
    u1: float
    u2: float
    pitch_ref: float


@dataclass
class FuzzyController:
    """The three adaptive loops plus the desired-pitch memory."""

    roll: AdaptiveFuzzyLoop
    yaw: AdaptiveFuzzyLoop
    pitch: AdaptiveFuzzyLoop
    nominal_feedback: bool = True
    pitch_limits: tuple = PITCH_LIMITS
    _memory: np.ndarray = field(default_factory=lambda: np.zeros(2), repr=False)

    @property
    def loops(self):
        return self.roll, self.yaw, self.pitch

    def reset(self):
        self._memory[:] = 0.0
        for loop in self.loops:
            loop.weights[:] = 0.0

    def pack(self):
        """Array form consumed by the simulation kernels."""
        loops = self.loops
        return (
            np.stack([lp.rulebase.centers() for lp in loops]),
            np.stack([lp.rulebase.sigmas() for lp in loops]),
            np.stack([lp.weights for lp in loops]),
            np.stack([lp.gamma for lp in loops]),
            np.array([lp.output_gain for lp in loops], dtype=float),
            np.array([lp.kp for lp in loops], dtype=float),
            np.array([lp.kd for lp in loops], dtype=float),
            np.array([lp.eta_hat for lp in loops], dtype=float),
            np.stack([lp.lyap_p for lp in loops]),
        )

    def step(self, state, reference, dt: float) -> ControlSignals:
        return controller_step(self, state, reference, dt)


def controller_step(ctrl: FuzzyController, state, reference, dt: float) -> ControlSignals:
    """Compute ``(u1, u2)`` for one control period and adapt all three loops.

    ``reference`` is ``(roll_d, roll_rate_d, yaw_d, yaw_rate_d)``.  The
    desired-pitch rate is a backward difference against the previous call
    (zero on the first call).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    centers, sigmas, w, gamma, gain, kp, kd, eta, p = ctrl.pack()
    sig = np.empty(11)
    _fuzzy_control(np.asarray(state, dtype=float), np.asarray(reference, dtype=float),
                   centers, sigmas, w, gamma, gain, kp, kd, eta, p, ctrl.nominal_feedback,
                   ctrl._memory, float(dt), ctrl.pitch_limits[0], ctrl.pitch_limits[1], sig,
                   np.empty(w.shape[1]))
    if not (np.all(np.isfinite(sig)) and np.all(np.isfinite(w))):
        raise NumericalBlowUp("fuzzy controller produced non-finite output")
    for loop, row in zip(ctrl.loops, w):
        loop.weights[:] = row
    return ControlSignals(*(float(v) for v in sig))


# --- kernels -------------------------------------------------------------


@njit(cache=True)
def _firing(centers, sigmas, e, e_dot):
    f = np.empty(centers.shape[1])
    for i in range(f.size):
        a = (e - centers[0, i]) / sigmas[0, i]
        b = (e_dot - centers[1, i]) / sigmas[1, i]
        f[i] = math.exp(-0.5 * a * a) * math.exp(-0.5 * b * b)
    return f


@njit(cache=True)
def _normalize(f):
    total = f.sum()
    if not total > 0.0:
        return np.full(f.size, 1.0 / f.size)
    return f / total


@njit(cache=True)
def _adapt(w, gamma, phi, eta, p, e, e_dot, dt):
    s = eta * (p[1, 0] * e + p[1, 1] * e_dot)
    for i in range(w.size):
        w[i] -= dt * gamma[i] * phi[i] * s


@njit(cache=True)
def _loop_command(j, e, e_dot, centers, sigmas, w, gamma, gain, kp, kd, eta, p,
                  nominal, dt, phi):
    n = w.shape[1]
    total = 0.0
    for i in range(n):
        a = (e - centers[j, 0, i]) / sigmas[j, 0, i]
        b = (e_dot - centers[j, 1, i]) / sigmas[j, 1, i]
        phi[i] = math.exp(-0.5 * (a * a + b * b))
        total += phi[i]
    out = 0.0
    for i in range(n):
        phi[i] = phi[i] / total if total > 0.0 else 1.0 / n
        out += phi[i] * w[j, i]
    out *= gain[j]
    if nominal:
        out -= (kp[j] * e + kd[j] * e_dot) / eta[j]
    s = eta[j] * (p[j, 1, 0] * e + p[j, 1, 1] * e_dot)
    for i in range(n):
        w[j, i] -= dt * gamma[j, i] * phi[i] * s
    return out


@njit(cache=True)
def _fuzzy_control(x, ref, centers, sigmas, w, gamma, gain, kp, kd, eta, p, nominal,
                   memory, dt, pitch_lo, pitch_hi, sig, phi):
    # phi: scratch of length n_rules
    # loop order in the packed arrays: roll, yaw, pitch
    e_r = x[0] - ref[0]
    ed_r = x[3] - ref[1]
    e_y = x[2] - ref[2]
    ed_y = x[5] - ref[3]
    v1 = _loop_command(0, e_r, ed_r, centers, sigmas, w, gamma, gain, kp, kd, eta, p,
                       nominal, dt, phi)
    v2 = _loop_command(1, e_y, ed_y, centers, sigmas, w, gamma, gain, kp, kd, eta, p,
                       nominal, dt, phi)
    theta_d = _desired_pitch(v1, v2, x[0], pitch_lo, pitch_hi)
    u1 = _collective(v1, v2, x[0])
    theta_d_rate = (theta_d - memory[1]) / dt if memory[0] > 0.0 else 0.0
    memory[0] = 1.0
    memory[1] = theta_d
    e_t = x[1] - theta_d
    ed_t = x[4] - theta_d_rate
    u2 = _loop_command(2, e_t, ed_t, centers, sigmas, w, gamma, gain, kp, kd, eta, p,
                       nominal, dt, phi)
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
