"""Single-blade closed loop: one faulty actuator under the adaptive tracking law."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import ctrl_low
from ..plant import ActuatorParams, ActuatorState, actuator_derivative


@dataclass
class BladeRun:
    t: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    z: np.ndarray
    eta_hat: np.ndarray
    V: np.ndarray
    V_dot: np.ndarray


def run_blade(theta_d, delta, rho, theta_init, theta_dot_init=0.0, eta_init=0.0,
              gains: ctrl_low.LowLevelGains | None = None,
              actuator: ActuatorParams | None = None, dt=0.001, duration=20.0):
    """Simulate one blade tracking ``theta_d`` [rad] under constant faults.

    ``theta_d`` is a constant or a callable of time.  There is no pitch clamp,
    so the error dynamics are seen on their own.  ``V`` and ``V_dot`` are
    sampled at the controller ticks, before each update.
    """
    target = theta_d if callable(theta_d) else (lambda t, c=float(theta_d): c)
    gains = gains or ctrl_low.LowLevelGains()
    actuator = actuator or ActuatorParams(zeta0=gains.zeta0, omega_n0=gains.omega_n0)
    u = gains.angle_scale
    n = int(round(duration / dt))
    out = np.zeros((n + 1, 6))
    th, thd, eta = float(theta_init), float(theta_dot_init), float(eta_init)
    wn2 = delta * gains.omega_n0**2

    def f(a, b, cmd):
        return actuator_derivative(ActuatorState(a, b), cmd, delta, rho, actuator)

    for i in range(n + 1):
        z = ctrl_low.filtered_tracking_error(th * u, thd * u, target(i * dt) * u,
                                             gains.zeta0, gains.omega_n0)
        out[i] = (i * dt, th, thd, z, eta, ctrl_low.lyapunov(z, eta, delta, rho, gains))
        if i == n:
            break
        cmd = ctrl_low.control(th * u, thd * u, z, eta, gains.k_theta) / u
        eta = ctrl_low.adapt(z, thd * u, eta, gains.alpha, dt, gains.eta_max)
        k1 = f(th, thd, cmd)
        k2 = f(th + 0.5 * dt * k1[0], thd + 0.5 * dt * k1[1], cmd)
        k3 = f(th + 0.5 * dt * k2[0], thd + 0.5 * dt * k2[1], cmd)
        k4 = f(th + dt * k3[0], thd + dt * k3[1], cmd)
        th += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        thd += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    z = out[:, 3]
    return BladeRun(out[:, 0], out[:, 1], out[:, 2], z, out[:, 4], out[:, 5],
                    -wn2 * gains.k_theta * z**2)
