import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heliopt.dynamics import ModelParams
from heliopt.fuzzy import (
    N_RULES, AdaptiveFuzzyLoop, FuzzyController, GaussianMF, RuleBase, TrackingError,
    adapt_weights, control_output, eta_values, firing_strengths, mf_value, nominal_control,
    phi_hat, solve_lyapunov,
)

RB = RuleBase.from_negative_centers([3.0, 2.0, 1.0], [3.0, 2.0, 1.0])


def make_loop(**kw):
    args = dict(rulebase=RB, gamma=np.ones(N_RULES), kp=1.0, kd=1.0, eta_hat=1.0)
    args.update(kw)
    return AdaptiveFuzzyLoop(**args)


def test_gaussian_membership():
    mf = GaussianMF(1.0, 1.0)
    assert mf_value(mf, 1.0) == 1.0
    assert mf_value(mf, 2.0) == pytest.approx(math.exp(-0.5))
    with pytest.raises(ValueError):
        GaussianMF(0.0, 0.0)


def test_rulebase_mirrors_and_sorts():
    rb = RuleBase.from_negative_centers([1.0, 3.0, -2.0], [0.5, 0.5, 0.5])
    assert np.allclose(rb.centers()[0], [-3, -2, -1, 0, 1, 2, 3])
    assert np.allclose(rb.centers()[1], [-0.5, -0.5, -0.5, 0, 0.5, 0.5, 0.5])


def test_rulebase_rejects_asymmetry():
    good = tuple(GaussianMF(c) for c in (-3, -2, -1, 0, 1, 2, 3))
    bad = tuple(GaussianMF(c) for c in (-3, -2, -1, 0, 1, 2, 4))
    with pytest.raises(ValueError):
        RuleBase(good, bad)
    with pytest.raises(ValueError):
        RuleBase(good[:6], good)


def test_firing_peak_at_zero_error():
    f = firing_strengths(RB, TrackingError(0.0, 0.0))
    assert f[3] == 1.0 and np.all(f[:3] < 1.0)
    assert np.allclose(f, f[::-1])


def test_phi_hat_sums_to_one():
    phi = phi_hat(firing_strengths(RB, TrackingError(0.7, -1.2)))
    assert phi.sum() == pytest.approx(1.0, abs=1e-15)
    # no rule fires: fall back to equal weights rather than 0/0
    assert np.allclose(phi_hat(np.zeros(N_RULES)), 1.0 / N_RULES)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_phi_hat_is_a_distribution(e, de):
    phi = phi_hat(firing_strengths(RB, TrackingError(e, de)))
    assert np.all(phi >= 0)
    assert abs(phi.sum() - 1.0) < 1e-12


def test_lyapunov_unit_case():
    assert np.allclose(solve_lyapunov(1.0, 1.0), [[1.5, 0.5], [0.5, 1.0]], rtol=0, atol=1e-12)


@given(st.floats(1e-2, 1e3), st.floats(1e-2, 1e3))
def test_lyapunov_residual(kp, kd):
    a = np.array([[0.0, 1.0], [-kp, -kd]])
    p = solve_lyapunov(kp, kd)
    res = a.T @ p + p @ a + np.eye(2)
    assert np.max(np.abs(res)) <= 1e-10 * max(1.0, np.max(np.abs(p)))
    assert np.all(np.linalg.eigvalsh(p) > 0)


def test_lyapunov_general_q():
    q = np.array([[2.0, 0.3], [0.3, 1.0]])
    a = np.array([[0.0, 1.0], [-4.0, -3.0]])
    p = solve_lyapunov(4.0, 3.0, q)
    assert np.allclose(a.T @ p + p @ a, -q, atol=1e-12)


def test_lyapunov_rejects_non_hurwitz():
    with pytest.raises(ValueError):
        solve_lyapunov(0.0, 1.0)
    with pytest.raises(ValueError):
        solve_lyapunov(1.0, 1.0, -np.eye(2))


def test_zero_weights_give_zero_fuzzy_output():
    loop = make_loop(output_gain=50.0)
    phi = phi_hat(firing_strengths(RB, TrackingError(0.4, 0.1)))
    assert control_output(loop, phi) == 0.0


def test_nominal_term():
    loop = make_loop(kp=2.0, kd=3.0, eta_hat=0.5)
    assert nominal_control(loop, TrackingError(1.0, 1.0)) == pytest.approx(-10.0)


def test_adaptation_direction():
    loop = make_loop()
    phi = phi_hat(firing_strengths(RB, TrackingError(0.5, 0.0)))
    w = adapt_weights(loop, phi, TrackingError(0.5, 0.0), 1e-3)
    # p21 e + p22 e' > 0, so every active weight moves down
    assert np.all(w <= 0) and np.any(w < 0)
    assert np.all(loop.weights == 0)


def test_zero_gamma_freezes_weights():
    loop = make_loop(gamma=np.zeros(N_RULES))
    phi = phi_hat(firing_strengths(RB, TrackingError(0.5, 0.2)))
    assert np.all(adapt_weights(loop, phi, TrackingError(0.5, 0.2), 1e-3) == 0)


def test_loop_validation():
    with pytest.raises(ValueError):
        make_loop(gamma=-np.ones(N_RULES))
    with pytest.raises(ValueError):
        make_loop(eta_hat=0.0)


def test_eta_values():
    p = ModelParams()
    assert eta_values(p) == (p.l_a / p.j_roll, p.l_a / p.j_yaw, p.l_h / p.j_pitch)


def test_controller_step_at_rest_on_reference():
    loops = [make_loop() for _ in range(3)]
    ctrl = FuzzyController(*loops)
    sig = ctrl.step(np.zeros(6), (0.0, 0.0, 0.0, 0.0), 1e-3)
    assert sig.e_roll == 0.0 and sig.v1 == 0.0 and sig.u2 == 0.0


def test_controller_step_adapts_and_resets():
    loops = [make_loop() for _ in range(3)]
    ctrl = FuzzyController(*loops)
    ctrl.step(np.zeros(6), (0.5, 0.0, 0.3, 0.0), 1e-3)
    assert np.any(ctrl.roll.weights != 0) and np.any(ctrl.yaw.weights != 0)
    ctrl.reset()
    assert all(np.all(lp.weights == 0) for lp in ctrl.loops)


def test_worked_examples():
    assert mf_value(GaussianMF(0.0), 1.0) == pytest.approx(0.60653, abs=1e-5)
    assert mf_value(GaussianMF(2.0), 2.0) == 1.0
    rb = RuleBase.from_negative_centers([2.80, 0.0, 0.0], [9.51, 6.32, 0.97])
    f = firing_strengths(rb, TrackingError(0.0, 0.0))
    assert f[0] == pytest.approx(math.exp(-2.80 ** 2 / 2) * math.exp(-9.51 ** 2 / 2), rel=1e-12)
    assert np.allclose(phi_hat(np.ones(N_RULES)), 1 / 7)
    assert np.array_equal(phi_hat([2, 0, 0, 0, 0, 0, 0]), [1, 0, 0, 0, 0, 0, 0])
    p = ModelParams()
    assert eta_values(p)[2] == pytest.approx(3.9468, abs=1e-4)
    assert eta_values(p)[0] == pytest.approx(0.63780, abs=1e-5)


def test_control_output_examples_and_linearity():
    phi = np.zeros(N_RULES)
    phi[0] = 1.0
    assert control_output(make_loop(weights=np.full(N_RULES, 3.0)), phi) == 3.0
    uniform = np.full(N_RULES, 1 / 7)
    assert control_output(make_loop(weights=np.ones(N_RULES), output_gain=2.0),
                          uniform) == pytest.approx(2.0)
    rng = np.random.default_rng(0)
    w1, w2 = rng.normal(size=(2, N_RULES))
    phi = phi_hat(rng.random(N_RULES))
    lhs = control_output(make_loop(weights=2 * w1 - 3 * w2), phi)
    rhs = 2 * control_output(make_loop(weights=w1), phi) - 3 * control_output(
        make_loop(weights=w2), phi)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_adaptation_hand_example():
    loop = make_loop()
    phi = np.zeros(N_RULES)
    phi[0] = 1.0
    w = adapt_weights(loop, phi, TrackingError(1.0, 0.0), 1e-3)
    assert w[0] == pytest.approx(-0.0005, abs=1e-15)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_zero_error_leaves_weights(e, de):
    loop = make_loop(weights=np.arange(N_RULES, dtype=float))
    phi = phi_hat(firing_strengths(RB, TrackingError(e, de)))
    assert np.array_equal(adapt_weights(loop, phi, TrackingError(0.0, 0.0), 1e-3), loop.weights)


@given(st.floats(-6, 6), st.floats(-6, 6))
def test_static_map_is_odd(e, de):
    w = np.array([3.0, 2.0, 1.0, 0.0, -1.0, -2.0, -3.0])
    loop = make_loop(weights=w)
    plus = control_output(loop, phi_hat(firing_strengths(RB, TrackingError(e, de))))
    minus = control_output(loop, phi_hat(firing_strengths(RB, TrackingError(-e, -de))))
    assert plus == pytest.approx(-minus, abs=1e-12)
