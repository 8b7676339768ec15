"""High-level L2 rotor-speed regulator.

The regulator drives the filtered error

    sigma = (omega_r - omega_r0) + psi * integral(omega_r - omega_r0)

through a saturated law along a fixed direction ``rho0``:

    theta_d = theta0 - rho0 * sat(k * sigma, -theta0, theta_max - theta0)

Pitch quantities inside the saturation are expressed in the controller's pitch
unit (``angle_scale`` units per radian; degrees by default).  Inputs and
outputs of :func:`control` are always radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConicError, InvalidBoundsError

REFERENCE_THETA0 = 19.94 * math.pi / 180.0


def sat(x, a, b):
    """Clamp ``x`` to ``[a, b]``; works elementwise on arrays."""
    if np.any(np.asarray(a) > np.asarray(b)):
        raise InvalidBoundsError(f"lower bound {a!r} exceeds upper bound {b!r}")
    if np.ndim(x) == 0 and np.ndim(a) == 0 and np.ndim(b) == 0:
        return min(max(x, a), b)
    return np.minimum(np.maximum(x, a), b)


@dataclass(frozen=True)
class RobustnessBounds:
    rho_nu_bar: float
    rho_omega_bar: float
    phi: float
    mu: float = 1.0

    @classmethod
    def reference(cls):
        """Bound values quoted for the 5 MW design point."""
        return cls(rho_nu_bar=1.0, rho_omega_bar=1.5, phi=0.15, mu=1.0)


@dataclass(frozen=True)
class HighLevelGains:
    k: float = 55.0
    psi: float = 0.5
    gamma: float = 0.25
    rho0: tuple = (-1.0, -1.0, -1.0)
    theta0: float = REFERENCE_THETA0
    theta_max: float = math.pi / 2
    #: controller pitch units per radian (180/pi: the law works in degrees)
    angle_scale: float = 180.0 / math.pi
    #: anti-windup bound on the error integral [rad]; None disables it
    integral_limit: float | None = 1.0

    def __post_init__(self):
        if not (self.k > 0 and self.psi > 0 and self.gamma > 0 and self.angle_scale > 0):
            raise ValueError("k, psi, gamma and angle_scale must be positive")
        if len(self.rho0) != 3:
            raise ValueError("rho0 needs three entries")
        if not 0 <= self.theta0 <= self.theta_max:
            raise ValueError("theta0 must lie in [0, theta_max]")


@dataclass
class HighLevelState:
    omega_rI: float = 0.0
    #: error at the previous controller tick (trapezoidal integration)
    last_error: float | None = None


def filtered_error(omega_r, omega_r0, state: HighLevelState, psi):
    return (omega_r - omega_r0) + psi * state.omega_rI


def control(sigma, gains: HighLevelGains):
    """Desired pitch angles (rad, one per blade) for filtered error ``sigma``."""
    u = gains.angle_scale
    s = sat(gains.k * sigma, -gains.theta0 * u, (gains.theta_max - gains.theta0) * u)
    return gains.theta0 - np.asarray(gains.rho0, dtype=float) * (s / u)


def gain_bound(bounds: RobustnessBounds, psi, gamma):
    """Smallest k satisfying the L2-gain sufficient condition."""
    mu_phi = bounds.mu * bounds.phi
    if mu_phi == 0:
        raise DegenerateConicError("mu * phi is zero: the conic constraint gives no control authority")
    if not (psi > 0 and gamma > 0):
        raise ValueError("psi and gamma must be positive")
    return (
        1.0
        + (bounds.rho_omega_bar + 2.0 * psi) ** 2 / (4.0 * psi)
        + bounds.rho_nu_bar**2 / (4.0 * gamma**2)
    ) / mu_phi


def storage(sigma, omega_rI, psi):
    """Energy function 0.5 sigma^2 + 0.5 psi^2 omega_rI^2."""
    return 0.5 * sigma**2 + 0.5 * psi**2 * omega_rI**2


def supply_rate(nu_err, sigma, gamma):
    return gamma**2 * nu_err**2 - sigma**2


class HighLevelController:
    """Discrete-time realization: trapezoidal error integral at the controller rate."""

    def __init__(self, gains: HighLevelGains, omega_r0, state: HighLevelState | None = None):
        self.gains = gains
        self.omega_r0 = omega_r0
        self.state = state or HighLevelState()

    def update(self, omega_r, dt):
        """Integrate the error up to now and return (theta_d, sigma)."""
        st = self.state
        err = omega_r - self.omega_r0
        if st.last_error is not None:
            st.omega_rI += 0.5 * dt * (st.last_error + err)
            lim = self.gains.integral_limit
            if lim is not None:
                st.omega_rI = min(max(st.omega_rI, -lim), lim)
        st.last_error = err
        sigma = filtered_error(omega_r, self.omega_r0, st, self.gains.psi)
        return control(sigma, self.gains), sigma
