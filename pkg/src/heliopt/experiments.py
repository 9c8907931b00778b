"""Scenarios, closed-loop simulation, metrics and the tuned parameter vector.

The optimiser searches a flat 25-vector::

    0-2    output gains     K_roll, K_yaw, K_pitch
    3-4    PD gains         Kp, Kd (shared by the three loops)
    5-11   Gamma roll/yaw   (one diagonal shared by both loops)
    12-18  Gamma pitch
    19-21  |NL|, |NM|, |NS| centers of the error input
    22-24  |NL|, |NM|, |NS| centers of the error-rate input

Center entries are magnitudes: decoding sorts them, negates them, fixes Z
at 0 and mirrors the positive side.  All memberships use sigma = 1.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from heliopt.dynamics import PITCH_LIMITS, ROLL_LIMITS, ModelParams, _rk4_step, limits_array
from heliopt.fuzzy import AdaptiveFuzzyLoop, FuzzyController, RuleBase, _fuzzy_control, eta_values
from heliopt.pid import PidController, _pid_control
from heliopt.swarm import Bounds

N_PARAMS = 25
OUTPUT_GAINS = slice(0, 3)
PD_GAINS = slice(3, 5)
GAMMA_ROLL_YAW = slice(5, 12)
GAMMA_PITCH = slice(12, 19)
CENTERS_ERROR = slice(19, 22)
CENTERS_ERROR_RATE = slice(22, 25)

PARAMETER_NAMES = (
    ["K_roll", "K_yaw", "K_pitch", "Kp", "Kd"]
    + [f"gamma_ry_{i}" for i in range(7)]
    + [f"gamma_pitch_{i}" for i in range(7)]
    + ["c_NL_e", "c_NM_e", "c_NS_e", "c_NL_de", "c_NM_de", "c_NS_de"]
)

PUBLISHED = {
    "mpso": np.array([83.21, 168.53, 10.15, 1.78, 48.46,
                      79, 68, 33, 0, 79, 42, 76,
                      53, 48, 11, 49, 3, 88, 19,
                      2.80, 0.00, 0.00, 9.51, 6.32, 0.97], dtype=float),
    "pso": np.array([68.46, 157.95, 125.58, 5.57, 33.19,
                     70, 102, 77, 125, 55, 13, 112,
                     172, 100, 119, 185, 70, 155, 113,
                     120.92, 48.60, 0.04, 129.19, 125.02, 0.75], dtype=float),
}

# Best MPSO vector of the desk-scale campaign (30 particles, 100 iterations,
# seeds 0-4, nominal scenario); nominal RMSE 0.2539.
DESK_TUNED = np.array([
    173.7671871055814, 7.542050061380387, 81.44876006677652, 5.934651977872726,
    7.706306676992327, 89.95612770519438, 5.982452410464696, 94.67697964288614,
    17.009596758295157, 93.72692730771074, 37.880777079842595, 13.614130731834882,
    72.81446690176297, 92.34326970053043, 81.47248205738217, 7.927470548424671,
    32.22190526550354, 85.32479670365852, 8.097972119369038, 0.0006093113893922375,
    9.289796447139484, 8.81736453345872, 9.499930135662126, 9.640730138083747,
    0.8621966342240833,
])

_lo = np.zeros(N_PARAMS)
_hi = np.empty(N_PARAMS)
_hi[OUTPUT_GAINS] = 200.0
_hi[PD_GAINS] = 100.0
_hi[GAMMA_ROLL_YAW] = 100.0
_hi[GAMMA_PITCH] = 100.0
_hi[CENTERS_ERROR] = 10.0
_hi[CENTERS_ERROR_RATE] = 10.0
# Per-parameter box used by MPSO; plain PSO searches [0, 200] everywhere.
MPSO_BOUNDS = Bounds(_lo, _hi)
UNIFORM_BOUNDS = Bounds.uniform(0.0, 200.0, N_PARAMS)

UNSTABLE_PENALTY = 1e6

AXES = {"roll": 0, "pitch": 1, "yaw": 2}


def published_vector(name: str) -> np.ndarray:
    return PUBLISHED[name.lower()].copy()


def decode(vector, params: ModelParams | None = None, nominal_feedback: bool = True,
           sigma: float = 1.0) -> FuzzyController:
    """Build the three adaptive loops from a 25-vector (weights start at zero)."""
    v = np.asarray(vector, dtype=float)
    if v.shape != (N_PARAMS,):
        raise ValueError(f"expected {N_PARAMS} parameters, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("parameter vector has non-finite entries")
    params = ModelParams() if params is None else params
    eta_roll, eta_yaw, eta_pitch = eta_values(params)
    rb = RuleBase.from_negative_centers(v[CENTERS_ERROR], v[CENTERS_ERROR_RATE], sigma)
    kp, kd = v[PD_GAINS]
    k_roll, k_yaw, k_pitch = v[OUTPUT_GAINS]

    def loop(gain, gamma, eta):
        return AdaptiveFuzzyLoop(rb, gamma, float(kp), float(kd), eta, float(gain))

    return FuzzyController(
        roll=loop(k_roll, v[GAMMA_ROLL_YAW], eta_roll),
        yaw=loop(k_yaw, v[GAMMA_ROLL_YAW], eta_yaw),
        pitch=loop(k_pitch, v[GAMMA_PITCH], eta_pitch),
        nominal_feedback=nominal_feedback,
    )


def encode(ctrl: FuzzyController) -> np.ndarray:
    v = np.empty(N_PARAMS)
    v[OUTPUT_GAINS] = [lp.output_gain for lp in ctrl.loops]
    v[PD_GAINS] = ctrl.roll.kp, ctrl.roll.kd
    v[GAMMA_ROLL_YAW] = ctrl.roll.gamma
    v[GAMMA_PITCH] = ctrl.pitch.gamma
    centers = ctrl.roll.rulebase.centers()
    v[CENTERS_ERROR] = -centers[0, :3]
    v[CENTERS_ERROR_RATE] = -centers[1, :3]
    return v


class Disturbance(NamedTuple):
    """Constant angular-acceleration offset applied from ``onset`` onwards."""

    axis: str
    magnitude: float
    onset: float


@dataclass(frozen=True)
class Scenario:
    label: str = "nominal"
    mass_scale: float = 1.0
    disturbances: tuple = ()
    horizon: float = 20.0
    dt: float = 1e-3
    roll_envelope: bool = False

    def __post_init__(self):
        if not self.horizon > 0 or not self.dt > 0:
            raise ValueError("horizon and dt must be positive")
        if not self.mass_scale > 0:
            raise ValueError("mass_scale must be positive")
        dist = tuple(Disturbance(*d) for d in self.disturbances)
        for d in dist:
            if d.axis not in AXES:
                raise ValueError(f"unknown disturbance axis {d.axis!r}")
            if not d.onset < self.horizon:
                raise ValueError("disturbance onset must precede the horizon")
        object.__setattr__(self, "disturbances", dist)

    @property
    def n_samples(self) -> int:
        return int(round(self.horizon / self.dt)) + 1

    def limits(self) -> np.ndarray:
        return limits_array(PITCH_LIMITS, ROLL_LIMITS if self.roll_envelope else None)

    def disturbance_array(self) -> np.ndarray:
        out = np.zeros((len(self.disturbances), 3))
        for i, d in enumerate(self.disturbances):
            out[i] = AXES[d.axis], d.magnitude, d.onset
        return out


SCENARIOS = {
    "nominal": Scenario("nominal"),
    "half-mass": Scenario("half-mass", mass_scale=0.5),
    "heavy": Scenario("heavy", mass_scale=1.5),
    "disturbed": Scenario("disturbed", disturbances=(("roll", 1.0, 12.0),
                                                     ("pitch", 1.0, 14.0),
                                                     ("yaw", 0.1, 16.0))),
}
NOMINAL = SCENARIOS["nominal"]


def desired_trajectory(t):
    """Sigmoid reference shared by roll and yaw."""
    return np.vectorize(_reference_value, otypes=[float])(t)[()]


def desired_rate(t):
    return np.vectorize(_reference_rate, otypes=[float])(t)[()]


@dataclass
class RunRecord:
    label: str
    controller: str
    t: np.ndarray
    state: np.ndarray       # (n, 6)
    desired: np.ndarray     # (n, 3): roll, pitch, yaw references
    errors: np.ndarray      # (n, 3): roll, pitch, yaw
    error_rates: np.ndarray
    controls: np.ndarray    # (n, 4): v1, v2, u1, u2
    stable: bool
    expected_samples: int
    seed: int | None = None
    digest: str = ""
    rmse: float = field(init=False)
    iacs: float = field(init=False)

    def __post_init__(self):
        self.rmse = rmse(self)
        self.iacs = iacs(self)

    @property
    def completed_fraction(self) -> float:
        if self.expected_samples <= 1:
            return 1.0
        return (len(self.t) - 1) / (self.expected_samples - 1)

    def window(self, start: float, stop: float = math.inf) -> np.ndarray:
        return (self.t >= start - 1e-9) & (self.t < stop - 1e-9)


def rmse(run: RunRecord) -> float:
    e = np.asarray(run.errors)
    if e.shape[0] == 0:
        return math.nan
    return float(np.sqrt(np.mean(np.sum(e * e, axis=1))))


def iacs(run: RunRecord) -> float:
    if len(run.t) < 2:
        return 0.0
    c = np.asarray(run.controls)
    effort = np.abs(c[:, 0]) + np.abs(c[:, 1]) + np.abs(c[:, 3])
    return float(np.trapezoid(effort, run.t))


def config_digest(*parts) -> str:
    def norm(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if dataclasses.is_dataclass(obj):
            return {f.name: norm(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                    if not f.name.startswith("_")}
        if isinstance(obj, (list, tuple)):
            return [norm(o) for o in obj]
        return obj

    blob = json.dumps([norm(p) for p in parts], sort_keys=True, default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def simulate(scenario: Scenario, controller, params: ModelParams | None = None,
             label: str | None = None, seed: int | None = None) -> RunRecord:
    """Closed-loop run from the zero state.

    ``controller`` is a :class:`FuzzyController`, a :class:`PidController`
    or a 25-vector.  ``scenario.mass_scale`` changes the plant only; the
    controller keeps its nominal constants.  A non-finite state ends the
    run early with ``stable=False``.
    """
    params = ModelParams() if params is None else params
    plant = params.with_mass_scale(scenario.mass_scale).as_array()
    n = scenario.n_samples
    limits = scenario.limits()
    dist = scenario.disturbance_array()
    xs = np.zeros((n, 6))
    refs = np.zeros((n, 4))
    sigs = np.zeros((n, 11))
    if not isinstance(controller, (FuzzyController, PidController)):
        vector = np.asarray(controller, dtype=float)
        controller = decode(vector, params)
        description = vector
        label = label or "fuzzy"
    else:
        description = controller
    if isinstance(controller, FuzzyController):
        label = label or "fuzzy"
        centers, sigmas, w, gamma, gain, kp, kd, eta, p = controller.pack()
        count = _simulate_fuzzy(plant, limits, dist, scenario.dt, n, centers, sigmas, w, gamma,
                                gain, kp, kd, eta, p, controller.nominal_feedback, xs, refs, sigs)
    else:
        label = label or "pid"
        count = _simulate_pid(plant, limits, dist, scenario.dt, n, controller.gains_array(),
                              xs, refs, sigs)
    sl = slice(0, count)
    t = np.arange(count) * scenario.dt
    sig = sigs[sl]
    return RunRecord(
        label=scenario.label,
        controller=label,
        t=t,
        state=xs[sl],
        desired=np.column_stack([refs[sl, 0], sig[:, 10], refs[sl, 2]]),
        errors=sig[:, [0, 4, 2]],
        error_rates=sig[:, [1, 5, 3]],
        controls=sig[:, [6, 7, 8, 9]],
        stable=count == n,
        expected_samples=n,
        seed=seed,
        digest=config_digest(scenario, params, description),
    )


def penalty(completed_fraction: float) -> float:
    return UNSTABLE_PENALTY + (1.0 - completed_fraction)


def objective(vector, scenario: Scenario = NOMINAL, params: ModelParams | None = None) -> float:
    """RMSE of the closed loop, or the instability penalty."""
    try:
        ctrl = decode(vector, params)
    except ValueError:
        return penalty(0.0)
    run = simulate(scenario, ctrl, params)
    if not run.stable:
        return penalty(run.completed_fraction)
    return run.rmse


class NominalObjective:
    """Picklable objective bound to a scenario (for process pools)."""

    def __init__(self, scenario: Scenario = NOMINAL, params: ModelParams | None = None):
        self.scenario = scenario
        self.params = params

    def __call__(self, vector) -> float:
        return objective(vector, self.scenario, self.params)


def write_run_csv(run: RunRecord, path) -> None:
    header = ["t", "roll", "pitch", "yaw", "roll_d", "pitch_d", "yaw_d",
              "e_roll", "e_pitch", "e_yaw", "v1", "v2", "u1", "u2"]
    data = np.column_stack([run.t, run.state[:, :3], run.desired, run.errors, run.controls])
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt="%.10g")


def summary_text(run: RunRecord) -> str:
    items = [("label", run.label), ("controller", run.controller), ("rmse", repr(run.rmse)),
             ("iacs", repr(run.iacs)), ("stable", str(run.stable).lower()),
             ("seed", "" if run.seed is None else str(run.seed)), ("digest", run.digest)]
    return "".join(f"{k} = {v}\n" for k, v in items)


# --- kernels -------------------------------------------------------------


@njit(cache=True)
def _reference_value(t):
    z = 2.5 * (t + 2.0)
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


@njit(cache=True)
def _reference_rate(t):
    s = _reference_value(t)
    return 2.5 * s * (1.0 - s)


@njit(cache=True)
def _fill_reference(t, ref):
    ref[0] = _reference_value(t)
    ref[1] = _reference_rate(t)
    ref[2] = ref[0]
    ref[3] = ref[1]


@njit(cache=True)
def _offsets(t, dist, out):
    out[:] = 0.0
    for i in range(dist.shape[0]):
        if t >= dist[i, 2]:
            out[int(dist[i, 0])] += dist[i, 1]


@njit(cache=True)
def _finite(a):
    for v in a:
        if not math.isfinite(v):
            return False
    return True


@njit(cache=True)
def _simulate_fuzzy(p, limits, dist, dt, n, centers, sigmas, w, gamma, gain, kp, kd, eta, lyap,
                    nominal, xs, refs, sigs):
    x = np.zeros(6)
    memory = np.zeros(2)
    ref = np.empty(4)
    sig = np.empty(11)
    phi = np.empty(w.shape[1])
    offset = np.zeros(3)
    for k in range(n):
        t = k * dt
        _fill_reference(t, ref)
        _fuzzy_control(x, ref, centers, sigmas, w, gamma, gain, kp, kd, eta, lyap, nominal,
                       memory, dt, limits[0], limits[1], sig, phi)
        if not _finite(sig):
            return k
        xs[k] = x
        refs[k] = ref
        sigs[k] = sig
        if k == n - 1:
            break
        _offsets(t, dist, offset)
        x = _rk4_step(x, sig[8], sig[9], p, offset, dt, limits)
        if not _finite(x):
            return k + 1
    return n


@njit(cache=True)
def _simulate_pid(p, limits, dist, dt, n, gains, xs, refs, sigs):
    x = np.zeros(6)
    state = np.zeros((3, 3))
    memory = np.zeros(2)
    ref = np.empty(4)
    sig = np.empty(11)
    offset = np.zeros(3)
    for k in range(n):
        t = k * dt
        _fill_reference(t, ref)
        _pid_control(x, ref, gains, state, memory, dt, limits[0], limits[1], sig)
        if not _finite(sig):
            return k
        xs[k] = x
        refs[k] = ref
        sigs[k] = sig
        if k == n - 1:
            break
        _offsets(t, dist, offset)
        x = _rk4_step(x, sig[8], sig[9], p, offset, dt, limits)
        if not _finite(x):
            return k + 1
    return n
