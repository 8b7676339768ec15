"""Incipient actuator fault schedule: ramp up, hold, ramp down."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class FaultSchedule:
    t_start_ramp: float = 150.0
    t_full_start: float = 180.0
    t_full_end: float = 220.0
    t_clear: float = 250.0
    delta_full: float = 0.5
    rho_full: float = 0.8
    #: 1-based indices of the faulty blades
    blades: tuple = (1, 2, 3)

    def __post_init__(self):
        times = (self.t_start_ramp, self.t_full_start, self.t_full_end, self.t_clear)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("fault schedule times must be strictly increasing")
        if not (0 < self.delta_full <= 1 and 0 < self.rho_full <= 1):
            raise ConfigError("delta_full and rho_full must lie in (0, 1]")
        if not set(self.blades) <= {1, 2, 3}:
            raise ConfigError("fault blades must be drawn from 1, 2, 3")

    @property
    def mask(self):
        return np.array([int(j in self.blades) for j in (1, 2, 3)], dtype=np.intp)

    def severity(self, t):
        """0 outside the fault, 1 in the full window, linear across the ramps."""
        t = np.asarray(t, dtype=float)
        return np.interp(
            t,
            [self.t_start_ramp, self.t_full_start, self.t_full_end, self.t_clear],
            [0.0, 1.0, 1.0, 0.0],
            left=0.0, right=0.0,
        )


def fault_factors(schedule: FaultSchedule | None, t):
    """(delta, rho) at time(s) ``t``; nominal (1, 1) without a schedule."""
    if schedule is None:
        one = np.ones_like(np.asarray(t, dtype=float))
        return (float(one), float(one)) if one.ndim == 0 else (one, one.copy())
    s = schedule.severity(t)
    delta = 1.0 + s * (schedule.delta_full - 1.0)
    rho = 1.0 + s * (schedule.rho_full - 1.0)
    if np.ndim(delta) == 0:
        return float(delta), float(rho)
    return delta, rho
