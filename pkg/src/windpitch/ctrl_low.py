"""Per-blade adaptive pitch tracking.

Each blade tracks its desired angle with the filtered error
``z = theta_dot + 2 zeta0 wn0 (theta - theta_d)`` and the command

    theta_r = theta - k_theta z + eta_hat theta_dot

while ``eta_hat`` follows the gradient law ``d(eta_hat)/dt = -alpha z theta_dot``.
The desired angle is treated as constant between controller ticks.

The free functions are unit-agnostic; :class:`LowLevelController` converts
radians to the controller pitch unit given by ``LowLevelGains.angle_scale``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LowLevelGains:
    k_theta: float = 2.5
    alpha: float = 0.3
    zeta0: float = 0.6
    omega_n0: float = 11.11
    angle_scale: float = 180.0 / math.pi
    #: optional bound |eta_hat| <= eta_max [s]; None disables projection
    eta_max: float | None = None

    def __post_init__(self):
        if not (self.k_theta > 0 and self.alpha > 0):
            raise ValueError("k_theta and alpha must be positive")


@dataclass
class LowLevelState:
    eta_hat: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.eta_hat = np.array(self.eta_hat, dtype=float)


def filtered_tracking_error(theta, theta_dot, theta_d, zeta0=0.6, omega_n0=11.11):
    return theta_dot + 2.0 * zeta0 * omega_n0 * (theta - theta_d)


def control(theta, theta_dot, z, eta_hat, k_theta):
    return theta - k_theta * z + eta_hat * theta_dot


def adapt(z, theta_dot, eta_hat, alpha, dt, eta_max=None):
    """One explicit-Euler step of the adaptation law."""
    out = eta_hat - alpha * z * theta_dot * dt
    if eta_max is not None:
        out = np.clip(out, -eta_max, eta_max)
    return out


def eta_true(delta, rho, zeta0=0.6, omega_n0=11.11):
    """Fault-induced parameter the estimator tries to learn [s]."""
    if delta == 0:
        raise ZeroDivisionError("delta = 0 leaves the actuator without stiffness")
    return 2.0 * (rho * zeta0 * omega_n0 - zeta0 * omega_n0) / (delta * omega_n0**2)


def lyapunov(z, eta_hat, delta, rho, gains: LowLevelGains):
    """0.5 z^2 + delta wn0^2 / (2 alpha) * (eta_hat - eta)^2 (controller units)."""
    eta_err = eta_hat - eta_true(delta, rho, gains.zeta0, gains.omega_n0)
    return 0.5 * z**2 + delta * gains.omega_n0**2 / (2.0 * gains.alpha) * eta_err**2


class LowLevelController:
    """Three independent blade controllers sharing one gain set."""

    def __init__(self, gains: LowLevelGains, state: LowLevelState | None = None):
        self.gains = gains
        self.state = state or LowLevelState()

    def update(self, theta, theta_dot, theta_d, dt):
        """Return (theta_r [rad], z [controller units]) and advance the estimate."""
        g = self.gains
        u = g.angle_scale
        th = np.asarray(theta, dtype=float) * u
        thd = np.asarray(theta_dot, dtype=float) * u
        z = filtered_tracking_error(th, thd, np.asarray(theta_d, dtype=float) * u,
                                    g.zeta0, g.omega_n0)
        theta_r = control(th, thd, z, self.state.eta_hat, g.k_theta) / u
        self.state.eta_hat = adapt(z, thd, self.state.eta_hat, g.alpha, dt, g.eta_max)
        return theta_r, z
