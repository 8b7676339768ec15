import math

import mpmath
import numpy as np
import pytest

from windpitch import plant
from windpitch.errors import IntegrationDivergedError, SingularityError
from windpitch.plant import ActuatorParams, ActuatorState, PlantState, TurbineParams

WN0 = 11.11
Z0 = 0.6


def test_equilibrium_residual(fitted, op):
    f = plant.rotor_derivative(op.nu0, op.omega_r0, [op.theta0] * 3, fitted)
    assert abs(f) < 1e-9


def test_zero_pitch_is_g1(fitted):
    for nu, om in [(12.0, 1.1), (22.0, 1.267), (25.0, 1.5)]:
        assert plant.rotor_derivative(nu, om, [0, 0, 0], fitted) == plant.g1(nu, om, fitted)


def _rotor_mp(nu, om, theta, p):
    mpmath.mp.dps = 50
    nu, om = mpmath.mpf(nu), mpmath.mpf(om)
    s = mpmath.mpf(180) / mpmath.pi
    sq = sum((mpmath.mpf(t) * s) ** 2 for t in theta)
    kJ = mpmath.mpf(p.kappa) / mpmath.mpf(p.J)
    e = mpmath.exp(-mpmath.mpf(p.p2) * nu / om)
    g1 = kJ * nu**3 / om * (nu / om - mpmath.mpf(p.p1)) * e - mpmath.mpf(p.P0) / (mpmath.mpf(p.J) * om)
    g2 = kJ * nu**3 / (3 * om) * mpmath.mpf(p.p3) * e
    return g1 - g2 * sq


def test_extended_precision_oracle(fitted):
    got = plant.rotor_derivative(22.0, 1.267, [0.3, 0.3, 0.3], fitted)
    ref = float(_rotor_mp(22.0, 1.267, [0.3, 0.3, 0.3], fitted))
    # several large terms cancel; compare against their magnitude
    assert got == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_extended_precision_random(fitted, rng):
    for _ in range(20):
        nu, om = rng.uniform(11.4, 25), rng.uniform(1.0, 1.5)
        th = rng.uniform(0, 0.6, 3)
        ref = float(_rotor_mp(nu, om, th, fitted))
        assert plant.rotor_derivative(nu, om, th, fitted) == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_singularity_floor(fitted):
    with pytest.raises(SingularityError):
        plant.rotor_derivative(22.0, 0.05, [0, 0, 0], fitted)
    with pytest.raises(SingularityError):
        plant.rotor_derivative(22.0, -1.0, [0, 0, 0], fitted)


def test_turbine_params_positive():
    with pytest.raises(ValueError):
        TurbineParams(J=-1.0)


def test_actuator_equilibrium():
    act = ActuatorParams()
    for d, r in [(1, 1), (0.5, 0.8), (0.3, 0.2)]:
        assert plant.actuator_derivative(ActuatorState(0.4, 0.0), 0.4, d, r, act) == (0.0, 0.0)


def test_actuator_nominal_coefficients():
    A = plant.actuator_matrix(1.0, 1.0, ActuatorParams())
    np.testing.assert_allclose(A, [[0, 1], [-WN0**2, -2 * Z0 * WN0]])


def test_actuator_fault_example():
    d = plant.actuator_derivative(ActuatorState(0.0, 0.0), 1.0, 0.5, 0.8, ActuatorParams())
    assert d[0] == 0.0
    assert d[1] == pytest.approx(61.716, abs=1e-3)
    assert d[1] == pytest.approx(0.5 * WN0**2, rel=1e-15)


def test_actuator_rejects_bad_faults():
    for d, r in [(0.0, 1.0), (1.2, 1.0), (1.0, 0.0), (1.0, -0.1)]:
        with pytest.raises(ValueError):
            plant.actuator_derivative(ActuatorState(0, 0), 0, d, r, ActuatorParams())


def test_faultless_actuator_stable():
    eig = np.linalg.eigvals(plant.actuator_matrix(1.0, 1.0, ActuatorParams()))
    assert np.all(eig.real < 0)


def test_monotone_fault_effect():
    vals = [plant.actuator_derivative(ActuatorState(0, 0), 1.0, d, 1.0, ActuatorParams())[1]
            for d in (1.0, 0.8, 0.6, 0.4, 0.2)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def _analytic_step(t, theta_init, theta_cmd, zeta=Z0, wn=WN0):
    # underdamped response from rest
    wd = wn * math.sqrt(1 - zeta**2)
    a = theta_cmd - theta_init
    return theta_cmd - a * np.exp(-zeta * wn * t) * (np.cos(wd * t) + zeta / math.sqrt(1 - zeta**2) * np.sin(wd * t))


def _run_pitch(dt, T, theta_init, theta_cmd, fitted):
    st = PlantState(1.267, np.full(3, theta_init), np.zeros(3))
    for _ in range(int(round(T / dt))):
        st = plant.step(st, 22.0, theta_cmd, 1.0, 1.0, dt, fitted, ActuatorParams())
    return st


def test_step_response_matches_closed_form(fitted):
    st = _run_pitch(0.001, 2.0, 0.2, 0.5, fitted)
    np.testing.assert_allclose(st.theta, _analytic_step(2.0, 0.2, 0.5), atol=1e-6)


def test_rk4_global_order(fitted):
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        st = _run_pitch(dt, 0.3, 0.2, 0.5, fitted)
        errs.append(abs(st.theta[0] - _analytic_step(0.3, 0.2, 0.5)))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(3.6 < o < 4.4 for o in orders), orders


def test_one_step_richardson(fitted):
    # local error of RK4 is O(dt^5): halving dt shrinks the one-step gap ~32x
    st0 = PlantState(1.2, np.array([0.1, 0.3, 0.5]), np.array([0.2, -0.1, 0.0]))
    act = ActuatorParams()

    def gap(dt):
        one = plant.step(st0, 20.0, 0.6, 1.0, 1.0, dt, fitted, act, clamp=False)
        half = plant.step(st0, 20.0, 0.6, 1.0, 1.0, dt / 2, fitted, act, clamp=False)
        half = plant.step(half, 20.0, 0.6, 1.0, 1.0, dt / 2, fitted, act, clamp=False)
        return np.max(np.abs(one.as_vector() - half.as_vector()))

    ratio = gap(0.02) / gap(0.01)
    assert 24 < ratio < 40


def test_equilibrium_step_unchanged(fitted, op):
    st = PlantState(op.omega_r0, np.full(3, op.theta0), np.zeros(3))
    out = plant.step(st, op.nu0, op.theta0, 1.0, 1.0, 0.001, fitted, ActuatorParams())
    np.testing.assert_allclose(out.as_vector(), st.as_vector(), rtol=0, atol=1e-14)


def test_impulse_response_decays(fitted):
    st = PlantState(1.267, np.full(3, 0.4), np.full(3, 1.0))
    for _ in range(5000):
        st = plant.step(st, 22.0, 0.4, 1.0, 1.0, 0.001, fitted, ActuatorParams())
    assert np.all(np.abs(st.theta - 0.4) < 1e-4)
    assert np.all(np.abs(st.theta_dot) < 1e-3)


def test_clamp_pitch():
    th, thd = plant.clamp_pitch([-0.1, 0.5, 2.0], [-1.0, 1.0, 1.0], math.pi / 2)
    np.testing.assert_array_equal(th, [0.0, 0.5, math.pi / 2])
    np.testing.assert_array_equal(thd, [0.0, 1.0, 0.0])
    th, thd = plant.clamp_pitch([0.3], [0.5], math.pi / 2, rate_limit=0.14)
    assert thd[0] == 0.14


def test_step_clamps_into_stop(fitted):
    st = PlantState(1.267, np.full(3, 0.001), np.full(3, -1.0))
    out = plant.step(st, 22.0, 0.0, 1.0, 1.0, 0.01, fitted, ActuatorParams())
    assert np.all(out.theta == 0.0) and np.all(out.theta_dot == 0.0)


def test_step_propagates_singularity(fitted):
    st = PlantState(0.04, np.zeros(3), np.zeros(3))
    with pytest.raises(SingularityError):
        plant.step(st, 22.0, 0.0, 1.0, 1.0, 0.01, fitted, ActuatorParams())


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_step_divergence(fitted):
    st = PlantState(1.267, np.zeros(3), np.full(3, 1e308))
    with pytest.raises(IntegrationDivergedError):
        plant.step(st, 22.0, 0.0, 1.0, 1.0, 0.01, fitted, ActuatorParams(), clamp=False)


def test_step_rejects_bad_dt(fitted):
    with pytest.raises(ValueError):
        plant.step(PlantState(1.267, np.zeros(3), np.zeros(3)), 22.0, 0.0, 1, 1, 0.0,
                   fitted, ActuatorParams())


def test_partials_vectorised_match_scalar(fitted):
    nu = np.array([12.0, 22.0])
    om = np.array([1.1, 1.3])
    th = np.array([[0.1, 0.2, 0.3], [0.4, 0.4, 0.4]])
    d_nu, d_om, g = plant.rotor_partials(nu, om, th, fitted)
    for i in range(2):
        a, b, c = plant.rotor_partials(nu[i], om[i], th[i], fitted)
        assert d_nu[i] == pytest.approx(a) and d_om[i] == pytest.approx(b)
        np.testing.assert_allclose(g[i], c)
