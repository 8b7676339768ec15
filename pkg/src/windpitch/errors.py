"""Exception types raised by the simulator and the design tools."""


class WindPitchError(Exception):
    """Base class for all package errors."""


class SingularityError(WindPitchError):
    """Rotor speed fell to (or below) the singularity floor of the rotor model."""

    def __init__(self, omega_r, floor, t=None):
        self.omega_r = omega_r
        self.floor = floor
        self.t = t
        where = "" if t is None else f" at t={t:.6g} s"
        super().__init__(
            f"rotor speed {omega_r:.6g} rad/s is at or below the floor {floor:g} rad/s{where}; "
            "the rotor model divides by omega_r"
        )

    def __reduce__(self):
        return type(self), (self.omega_r, self.floor, self.t)


class IntegrationDivergedError(WindPitchError):
    """The integrated plant state became non-finite."""

    def __init__(self, t=None):
        self.t = t
        where = "" if t is None else f" at t={t:.6g} s"
        super().__init__(f"plant state became non-finite{where}")

    def __reduce__(self):
        return type(self), (self.t,)


class InvalidBoundsError(WindPitchError, ValueError):
    pass


class DegenerateConicError(WindPitchError, ValueError):
    pass


class InfeasibleFitError(WindPitchError):
    pass


class OutOfRangeError(WindPitchError, ValueError):
    pass


class IncompatibleTraceError(WindPitchError, ValueError):
    pass


class ConfigError(WindPitchError, ValueError):
    pass
