"""Gain-scheduled PI collective-pitch regulator used as the comparison baseline.

    theta_d = G(theta) * (kp0 * e + ki0 * integral(e)),   G(theta) = 1 / (1 + theta / theta_k)

with ``e = omega_r - omega_r0``.  The integral is trapezoidal and is frozen
whenever the output saturates at 0 or ``theta_max``.

The default gains come from ``scripts/tune_baseline.py``: lowest rotor-speed
RMS on a held-out turbulent wind seed, subject to using no more pitch
activity than the proposed controller on the same wind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PIGains:
    kp0: float = 2.0
    ki0: float = 10.0
    theta_k: float = 0.1099
    theta_max: float = math.pi / 2

    def __post_init__(self):
        if not (self.kp0 > 0 and self.ki0 > 0 and self.theta_k > 0):
            raise ValueError("kp0, ki0 and theta_k must be positive")


@dataclass
class PIState:
    integral: float = 0.0
    last_error: float = 0.0


def gain_correction(theta, theta_k):
    return 1.0 / (1.0 + theta / theta_k)


def bumpless_integral(theta0, gains: PIGains):
    """Integral state that holds ``theta0`` at zero speed error."""
    return theta0 / (gain_correction(theta0, gains.theta_k) * gains.ki0)


def pi_control(omega_r, omega_r0, theta_meas, state: PIState, gains: PIGains, dt):
    """Collective pitch demand (3 equal angles, rad); updates ``state`` in place."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    err = omega_r - omega_r0
    candidate = state.integral + 0.5 * dt * (state.last_error + err)
    g = gain_correction(theta_meas, gains.theta_k)
    raw = g * (gains.kp0 * err + gains.ki0 * candidate)
    theta_d = min(max(raw, 0.0), gains.theta_max)
    if theta_d == raw:
        state.integral = candidate
    state.last_error = err
    return np.full(3, theta_d)
