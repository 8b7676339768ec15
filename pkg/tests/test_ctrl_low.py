import math

import numpy as np
import pytest

from windpitch import ctrl_low
from windpitch.ctrl_low import LowLevelController, LowLevelGains, LowLevelState
from windpitch.harness.lowlevel import run_blade
from windpitch.plant import DEG

Z0, WN0 = 0.6, 11.11
FAULTS = [(d, r) for d in (1.0, 0.7, 0.5) for r in (1.0, 0.8)]


def test_filtered_tracking_error_examples():
    assert ctrl_low.filtered_tracking_error(0.4, 0.0, 0.4) == 0.0
    assert ctrl_low.filtered_tracking_error(0.5, 0.0, 0.4) == pytest.approx(1.3332, abs=1e-12)
    thd = 0.3
    assert ctrl_low.filtered_tracking_error(0.4 - thd / (2 * Z0 * WN0), thd, 0.4) == pytest.approx(0, abs=1e-15)


def test_control_examples():
    assert ctrl_low.control(0.4, 0.0, 0.0, 0.3, 2.5) == 0.4
    assert ctrl_low.control(0.4, 0.0, 0.2, 0.0, 2.5) == pytest.approx(-0.1, abs=1e-15)
    assert ctrl_low.control(0.4, 2.0, 0.0, 0.1, 2.5) == pytest.approx(0.6)


def test_adapt_examples():
    assert ctrl_low.adapt(0.0, 0.5, 0.2, 0.3, 0.01) == 0.2
    assert ctrl_low.adapt(1.0, 0.0, 0.2, 0.3, 0.01) == 0.2
    assert ctrl_low.adapt(1.0, 0.5, 0.0, 0.3, 0.01) == pytest.approx(-0.0015, abs=1e-15)
    assert ctrl_low.adapt(1e6, 1.0, 0.0, 0.3, 0.01, eta_max=1.0) == -1.0


def test_eta_true_examples():
    assert ctrl_low.eta_true(1.0, 1.0) == 0.0
    assert ctrl_low.eta_true(0.5, 0.8) == pytest.approx(-0.04320, abs=1e-5)
    d = 0.7
    lhs = ctrl_low.eta_true(d, 0.9) - ctrl_low.eta_true(d, 0.6)
    assert lhs == pytest.approx(2 * Z0 * WN0 * 0.3 / (d * WN0**2), rel=1e-12)
    with pytest.raises(ZeroDivisionError):
        ctrl_low.eta_true(0.0, 1.0)


def test_exact_estimate_cancels_fault():
    # with eta_hat = eta, z obeys dz/dt = -delta wn0^2 k_theta z (checked on the derivative)
    from windpitch.plant import ActuatorParams, ActuatorState, actuator_derivative
    g = LowLevelGains(angle_scale=1.0)
    d, r = 0.5, 0.8
    eta = ctrl_low.eta_true(d, r)
    th, thd, th_d = 0.5, 0.2, 0.4
    z = ctrl_low.filtered_tracking_error(th, thd, th_d)
    cmd = ctrl_low.control(th, thd, z, eta, g.k_theta)
    acc = actuator_derivative(ActuatorState(th, thd), cmd, d, r, ActuatorParams())[1]
    z_dot = acc + 2 * Z0 * WN0 * thd
    assert z_dot == pytest.approx(-d * WN0**2 * g.k_theta * z, rel=1e-12)


def test_controller_units():
    g = LowLevelGains()
    ctl = LowLevelController(g)
    theta_r, z = ctl.update([0.4] * 3, [0.0] * 3, [0.3] * 3, 0.001)
    z_deg = 2 * Z0 * WN0 * 0.1 / DEG
    np.testing.assert_allclose(z, z_deg)
    np.testing.assert_allclose(theta_r, 0.4 - g.k_theta * z_deg * DEG)


def _random_start(rng, target):
    return (target + rng.uniform(-5, 5) * DEG, rng.uniform(-2, 2) * DEG, rng.uniform(-0.1, 0.1))


@pytest.mark.parametrize("delta,rho", FAULTS)
def test_lyapunov_and_convergence(delta, rho):
    rng = np.random.default_rng(int(delta * 100 + rho * 10))
    for _ in range(5):
        target = rng.uniform(0.2, 1.2)
        th0, thd0, eta0 = _random_start(rng, target)
        run = run_blade(target, delta, rho, th0, thd0, eta0, duration=20.0)
        dt = run.t[1] - run.t[0]
        assert np.max(np.diff(run.V)) <= dt * np.max(np.abs(run.V_dot))
        late = run.t >= 10.0
        assert np.all(np.abs(run.theta[late] - target) < 1e-4)
        # boundedness from V(0): |eta_hat - eta| <= sqrt(2 alpha V(0) / (delta wn0^2))
        eta_err = np.abs(run.eta_hat - ctrl_low.eta_true(delta, rho))
        assert np.max(eta_err) <= 1.01 * math.sqrt(2 * 0.3 * run.V[0] / (delta * WN0**2))


def test_lyapunov_increase_shrinks_with_dt():
    gaps = []
    for dt in (0.001, 0.0005):
        run = run_blade(0.5, 0.5, 0.8, 0.5 + 4 * DEG, 0.0, 0.05, dt=dt, duration=2.0)
        gaps.append(max(np.max(np.diff(run.V)), 0.0) / (dt * np.max(np.abs(run.V_dot))))
    assert gaps[1] < 0.75 * gaps[0]


def test_z_square_integrable():
    run = run_blade(0.6, 0.7, 0.8, 0.6 + 3 * DEG, 0.01, 0.0, duration=20.0)
    dt = run.t[1] - run.t[0]
    total = np.sum(run.z**2) * dt
    tail = np.sum(run.z[run.t >= 10.0] ** 2) * dt
    assert tail < 1e-8 * total


@pytest.mark.parametrize("delta,rho", [(1.0, 1.0), (0.5, 0.8)])
def test_estimate_limit_under_moving_target(delta, rho):
    # The law assumes a constant target; under a ramp the estimate settles
    # at eta + 2 zeta0 / (delta wn0) instead of eta.
    run = run_blade(lambda t: 0.3 + 0.02 * t, delta, rho, 0.3, 0.02, 0.0, duration=40.0)
    expected = ctrl_low.eta_true(delta, rho) + 2 * Z0 / (delta * WN0)
    assert run.eta_hat[-1] == pytest.approx(expected, rel=0.01)


def test_lyapunov_value():
    g = LowLevelGains()
    v = ctrl_low.lyapunov(2.0, 0.1, 0.5, 0.8, g)
    eta = ctrl_low.eta_true(0.5, 0.8)
    assert v == pytest.approx(2.0 + 0.5 * WN0**2 / 0.6 * (0.1 - eta) ** 2)


def test_state_and_gains():
    assert np.array_equal(LowLevelState().eta_hat, np.zeros(3))
    with pytest.raises(ValueError):
        LowLevelGains(alpha=0.0)
