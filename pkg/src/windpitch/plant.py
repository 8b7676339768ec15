"""Reduced-order turbine plant: rotor speed dynamics and three pitch actuators.

The rotor obeys

    d(omega_r)/dt = g1(nu, omega_r) - g2(nu, omega_r) * |theta|^2

with the aerodynamic terms g1, g2 built from kappa, J, P0 and the empirical
coefficients p1..p3.  Each pitch actuator is a second-order hydraulic loop
whose natural frequency and damping degrade with the fault factors
(delta, rho):

    theta'' = -2 rho zeta0 wn0 theta' - delta wn0^2 theta + delta wn0^2 theta_r

All angles are stored in radians.  The empirical coefficients p1..p3 were
fitted with pitch expressed in degrees, so the aerodynamic term evaluates
|theta|^2 after scaling by ``TurbineParams.aero_pitch_scale``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import IntegrationDivergedError, SingularityError

#: rotor speeds at or below this value abort the simulation [rad/s]
OMEGA_FLOOR = 0.05

DEG = math.pi / 180.0


@dataclass(frozen=True)
class TurbineParams:
    kappa: float = 7622.7
    J: float = 43784700.0
    P0: float = 5.0e6
    p1: float = 5.4148
    p2: float = 0.0682
    p3: float = 0.029
    theta_max: float = math.pi / 2
    #: multiplies pitch (rad) before it enters the aerodynamic term
    aero_pitch_scale: float = 180.0 / math.pi

    def __post_init__(self):
        for name in ("kappa", "J", "P0", "p1", "p2", "p3", "theta_max", "aero_pitch_scale"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"TurbineParams.{name} must be finite and > 0, got {value!r}")

    def with_coefficients(self, p1, p2, p3):
        return replace(self, p1=float(p1), p2=float(p2), p3=float(p3))


@dataclass(frozen=True)
class ActuatorParams:
    zeta0: float = 0.6
    omega_n0: float = 11.11
    #: optional |theta_dot| limit [rad/s]; None disables it
    rate_limit: float | None = None

    def __post_init__(self):
        if not 0 < self.zeta0 <= 1:
            raise ValueError(f"zeta0 must lie in (0, 1], got {self.zeta0!r}")
        if not self.omega_n0 > 0:
            raise ValueError(f"omega_n0 must be > 0, got {self.omega_n0!r}")
        if self.rate_limit is not None and not self.rate_limit > 0:
            raise ValueError("rate_limit must be > 0 or None")


@dataclass
class ActuatorState:
    theta: float
    theta_dot: float = 0.0


@dataclass
class PlantState:
    """Rotor speed plus per-blade pitch angle and rate (radians)."""

    omega_r: float
    theta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta_dot: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.theta = np.array(self.theta, dtype=float).reshape(3)
        self.theta_dot = np.array(self.theta_dot, dtype=float).reshape(3)

    def as_vector(self):
        return np.concatenate(([self.omega_r], self.theta, self.theta_dot))

    @classmethod
    def from_vector(cls, x):
        return cls(float(x[0]), x[1:4], x[4:7])

    def copy(self):
        return PlantState(self.omega_r, self.theta.copy(), self.theta_dot.copy())


def _check_omega(omega_r, t=None):
    if not math.isfinite(omega_r):
        raise IntegrationDivergedError(t)
    if not omega_r > OMEGA_FLOOR:
        raise SingularityError(float(omega_r), OMEGA_FLOOR, t)


def g1(nu, omega_r, params: TurbineParams):
    x = nu / omega_r
    return (
        params.kappa * nu**3 / (params.J * omega_r) * (x - params.p1) * math.exp(-params.p2 * x)
        - params.P0 / (params.J * omega_r)
    )


def g2(nu, omega_r, params: TurbineParams):
    """Pitch-effectiveness term, per unit of squared (scaled) pitch."""
    return (
        params.kappa * nu**3 / (3.0 * params.J * omega_r)
        * params.p3 * math.exp(-params.p2 * nu / omega_r)
    )


def rotor_derivative(nu, omega_r, theta_vec, params: TurbineParams):
    """Rotor acceleration [rad/s^2] for wind ``nu`` and pitch angles ``theta_vec`` (rad)."""
    _check_omega(omega_r)
    th = np.asarray(theta_vec, dtype=float) * params.aero_pitch_scale
    return g1(nu, omega_r, params) - g2(nu, omega_r, params) * float(th @ th)


def rotor_partials(nu, omega_r, theta_vec, params: TurbineParams):
    """Analytic (df/dnu, df/domega_r, grad_theta f) of the rotor model.

    Broadcasts over array ``nu``/``omega_r``; ``theta_vec`` has a trailing axis
    of length 3.  The pitch gradient is per radian of each blade angle.
    """
    nu = np.asarray(nu, dtype=float)
    omega_r = np.asarray(omega_r, dtype=float)
    if np.any(omega_r <= OMEGA_FLOOR):
        _check_omega(float(np.min(omega_r)))
    th = np.asarray(theta_vec, dtype=float)
    s2 = params.aero_pitch_scale**2
    x = nu / omega_r
    e = np.exp(-params.p2 * x)
    c = params.kappa / params.J
    h = x - params.p1 - params.p3 * s2 * np.sum(th * th, axis=-1) / 3.0
    d_nu = c * nu**2 / omega_r * e * (3.0 * h + x - params.p2 * x * h)
    d_omega = (
        c * nu**3 / omega_r**2 * e * (-h - x + params.p2 * x * h)
        + params.P0 / (params.J * omega_r**2)
    )
    g2_val = c * nu**3 / (3.0 * omega_r) * params.p3 * e
    grad_theta = -2.0 * s2 * g2_val[..., None] * th
    if d_nu.ndim == 0:
        return float(d_nu), float(d_omega), grad_theta
    return d_nu, d_omega, grad_theta


def actuator_derivative(state: ActuatorState, theta_r, delta, rho, params: ActuatorParams):
    """(d theta/dt, d theta_dot/dt) of one faulty pitch actuator."""
    if not (0 < delta <= 1 and 0 < rho <= 1):
        raise ValueError(f"fault factors must lie in (0, 1], got delta={delta!r}, rho={rho!r}")
    wn2 = delta * params.omega_n0**2
    return (
        state.theta_dot,
        -2.0 * rho * params.zeta0 * params.omega_n0 * state.theta_dot
        - wn2 * state.theta
        + wn2 * theta_r,
    )


def actuator_matrix(delta, rho, params: ActuatorParams):
    """Companion matrix of one actuator, state (theta, theta_dot)."""
    wn0 = params.omega_n0
    return np.array([[0.0, 1.0], [-delta * wn0**2, -2.0 * rho * params.zeta0 * wn0]])


def _field(x, nu, theta_r, delta, rho, turbine, actuator):
    # x = [omega_r, theta(3), theta_dot(3)]
    dx = np.empty(7)
    dx[0] = rotor_derivative(nu, x[0], x[1:4], turbine)
    wn0 = actuator.omega_n0
    dx[1:4] = x[4:7]
    dx[4:7] = (
        -2.0 * rho * actuator.zeta0 * wn0 * x[4:7]
        - delta * wn0**2 * x[1:4]
        + delta * wn0**2 * theta_r
    )
    return dx


def clamp_pitch(theta, theta_dot, theta_max, rate_limit=None):
    """Mechanical stop at [0, theta_max]; rate into a stop is zeroed."""
    theta = np.array(theta, dtype=float)
    theta_dot = np.array(theta_dot, dtype=float)
    if rate_limit is not None:
        np.clip(theta_dot, -rate_limit, rate_limit, out=theta_dot)
    low = theta < 0.0
    theta[low] = 0.0
    theta_dot[low & (theta_dot < 0.0)] = 0.0
    high = theta > theta_max
    theta[high] = theta_max
    theta_dot[high & (theta_dot > 0.0)] = 0.0
    return theta, theta_dot


def step(state: PlantState, nu, theta_r, delta, rho, dt,
         turbine: TurbineParams, actuator: ActuatorParams, clamp=True):
    """Advance the plant one RK4 step with wind, command and fault held constant."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    theta_r = np.broadcast_to(np.asarray(theta_r, dtype=float), (3,))
    x = state.as_vector()
    args = (nu, theta_r, delta, rho, turbine, actuator)
    k1 = _field(x, *args)
    k2 = _field(x + 0.5 * dt * k1, *args)
    k3 = _field(x + 0.5 * dt * k2, *args)
    k4 = _field(x + dt * k3, *args)
    xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(xn)):
        raise IntegrationDivergedError()
    out = PlantState.from_vector(xn)
    if clamp:
        out.theta, out.theta_dot = clamp_pitch(
            out.theta, out.theta_dot, turbine.theta_max, actuator.rate_limit
        )
    return out
