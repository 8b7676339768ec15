"""Controller design: coefficient fit at the operating point, robustness bounds, gain bound.

The fit solves

    minimise    |(p1, q, p3) - (p1_ref, q_ref, p3_ref)|^2
    subject to  (A (r - p1) - B p3 S) q - P0 / (J omega_r0) = 0

with ``q = exp(-p2 nu0 / omega_r0)``, ``r = nu0 / omega_r0``,
``A = kappa nu0^3 / (J omega_r0)``, ``B = A / 3`` and ``S`` the scaled squared
pitch norm at the operating point.  For fixed ``q`` the constraint is a line in
(p1, p3), so the inner problem is an exact projection; the outer problem is a
scalar search over ``q`` in (0, 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import plant
from .ctrl_high import REFERENCE_THETA0, RobustnessBounds, gain_bound
from .errors import InfeasibleFitError, SingularityError

#: coefficients reported for the 5 MW machine (p1, p2, p3), pitch in degrees
REFERENCE_P = (5.4148, 0.0682, 0.029)


@dataclass(frozen=True)
class Envelope:
    nu: tuple = (11.4, 25.0)
    omega_r: tuple = (1.0, 1.5)
    theta: tuple = (0.0, math.pi / 2)
    n: int = 64

    def grid(self, n=None):
        n = n or self.n
        axes = [np.linspace(lo, hi, n) if hi > lo else np.array([lo])
                for lo, hi in (self.nu, self.omega_r, self.theta)]
        return np.meshgrid(*axes, indexing="ij")

    def contains(self, nu, omega_r, theta):
        return (self.nu[0] <= nu <= self.nu[1] and self.omega_r[0] <= omega_r <= self.omega_r[1]
                and self.theta[0] <= theta <= self.theta[1])


@dataclass(frozen=True)
class OperatingPoint:
    omega_r0: float = 1.267
    nu0: float = 22.0
    theta0: float = REFERENCE_THETA0
    envelope: Envelope = field(default_factory=Envelope)

    def __post_init__(self):
        if not self.envelope.contains(self.nu0, self.omega_r0, self.theta0):
            raise ValueError("operating point lies outside its envelope")
        if self.envelope.nu[0] < 11.4 - 1e-12 or self.envelope.nu[1] > 25.0 + 1e-12:
            raise ValueError("envelope wind range must lie within [11.4, 25] m/s")

    def local(self, d_nu=2.0, d_omega=0.1, d_theta=5.0 * plant.DEG, n=32):
        """Operating point with a small envelope centred on itself."""
        env = Envelope(
            nu=(max(11.4, self.nu0 - d_nu), min(25.0, self.nu0 + d_nu)),
            omega_r=(self.omega_r0 - d_omega, self.omega_r0 + d_omega),
            theta=(max(0.0, self.theta0 - d_theta), self.theta0 + d_theta),
            n=n,
        )
        return OperatingPoint(self.omega_r0, self.nu0, self.theta0, env)


@dataclass(frozen=True)
class FitResult:
    p1: float
    p2: float
    p3: float
    #: exp(-p2 nu0 / omega_r0), the variable actually searched over (0, 1)
    q: float
    residual: float
    distance: float

    @property
    def objective(self):
        return self.distance**2

    def params(self, base: plant.TurbineParams):
        return base.with_coefficients(self.p1, self.p2, self.p3)


def _constraint_terms(op: OperatingPoint, params: plant.TurbineParams):
    A = params.kappa * op.nu0**3 / (params.J * op.omega_r0)
    S = 3.0 * (op.theta0 * params.aero_pitch_scale) ** 2
    return A, A / 3.0 * S, op.nu0 / op.omega_r0, params.P0 / (params.J * op.omega_r0)


def constraint_residual(p1, q, p3, op: OperatingPoint, params: plant.TurbineParams):
    A, BS, r, c = _constraint_terms(op, params)
    return (A * (r - p1) - BS * p3) * q - c


def fit_p(p_bar=REFERENCE_P, op: OperatingPoint | None = None,
          params: plant.TurbineParams | None = None, n_scan=4001) -> FitResult:
    """Closest coefficients to ``p_bar`` that put ``op`` at equilibrium."""
    op = op or OperatingPoint()
    params = params or plant.TurbineParams()
    A, BS, r, c = _constraint_terms(op, params)
    ratio = op.nu0 / op.omega_r0
    ref = np.array([p_bar[0], math.exp(-p_bar[1] * ratio), p_bar[2]])

    def project(q):
        # A q p1 + BS q p3 = A q r - c
        n = np.array([A * q, BS * q])
        g = n @ ref[[0, 2]] - (A * q * r - c)
        return ref[[0, 2]] - g * n / (n @ n)

    def objective(q):
        p1, p3 = project(q)
        return (p1 - ref[0]) ** 2 + (q - ref[1]) ** 2 + (p3 - ref[2]) ** 2

    qs = np.unique(np.concatenate([np.geomspace(1e-12, 1.0, n_scan)[:-1],
                                   np.linspace(0.0, 1.0, n_scan)[1:-1]]))
    vals = np.array([objective(q) if min(project(q)) > 0 else np.inf for q in qs])
    if not np.isfinite(vals).any():
        raise InfeasibleFitError("no q in (0, 1) yields positive p1 and p3")
    i = int(np.argmin(vals))
    if 0 < i < len(qs) - 1:
        res = minimize_scalar(objective, bracket=(qs[i - 1], qs[i], qs[i + 1]),
                              method="golden", tol=1e-12)
        q = float(res.x) if res.fun <= vals[i] else float(qs[i])
    else:
        q = float(qs[i])
    p1, p3 = project(q)
    if not (0.0 < q < 1.0 and p1 > 0 and p3 > 0):
        raise InfeasibleFitError(f"fit left the feasible region (q={q}, p1={p1}, p3={p3})")
    p2 = -math.log(q) / ratio
    fitted = params.with_coefficients(p1, p2, p3)
    residual = plant.rotor_derivative(op.nu0, op.omega_r0, [op.theta0] * 3, fitted)
    return FitResult(float(p1), float(p2), float(p3), q, abs(float(residual)),
                     math.sqrt(objective(q)))


def fitted_params(params: plant.TurbineParams | None = None, op: OperatingPoint | None = None,
                  p_bar=REFERENCE_P):
    params = params or plant.TurbineParams()
    return fit_p(p_bar, op, params).params(params)


def envelope_partials(op: OperatingPoint, params: plant.TurbineParams, n=None):
    """Grid points and analytic partials over the envelope (collective pitch)."""
    env = op.envelope
    if env.omega_r[0] <= plant.OMEGA_FLOOR:
        raise SingularityError(env.omega_r[0], plant.OMEGA_FLOOR)
    nu, om, th = env.grid(n)
    theta_vec = np.repeat(th[..., None], 3, axis=-1)
    d_nu, d_om, grad = plant.rotor_partials(nu, om, theta_vec, params)
    return (nu, om, th), d_nu, d_om, grad


def bound_rho(op: OperatingPoint, params: plant.TurbineParams, rho0=(-1.0, -1.0, -1.0),
              angle_scale=180.0 / math.pi, n=None) -> RobustnessBounds:
    """Grid bounds on |df/dnu|, |df/domega| and the conic margin min(grad_theta . rho0).

    The conic margin is per controller pitch unit (``angle_scale`` per radian).
    """
    _, d_nu, d_om, grad = envelope_partials(op, params, n)
    conic = grad @ np.asarray(rho0, dtype=float) / angle_scale
    return RobustnessBounds(
        rho_nu_bar=float(np.max(np.abs(d_nu))),
        rho_omega_bar=float(np.max(np.abs(d_om))),
        phi=float(np.min(conic)),
        mu=1.0,
    )


def k_min(bounds: RobustnessBounds, psi, gamma):
    return gain_bound(bounds, psi, gamma)


def gain_bound_arithmetic(bounds: RobustnessBounds, psi, gamma):
    """Human-readable evaluation of the gain condition."""
    t_omega = (bounds.rho_omega_bar + 2 * psi) ** 2 / (4 * psi)
    t_nu = bounds.rho_nu_bar**2 / (4 * gamma**2)
    mu_phi = bounds.mu * bounds.phi
    return (
        f"k >= (1 + ({bounds.rho_omega_bar:g} + 2*{psi:g})^2/(4*{psi:g}) "
        f"+ {bounds.rho_nu_bar:g}^2/(4*{gamma:g}^2)) / ({bounds.mu:g}*{bounds.phi:g}) "
        f"= (1 + {t_omega:.6g} + {t_nu:.6g}) / {mu_phi:.6g} = {(1 + t_omega + t_nu) / mu_phi:.6g}"
    )


def design_report(params: plant.TurbineParams | None = None, op: OperatingPoint | None = None,
                  psi=0.5, gamma=0.25, k=55.0, p_bar=REFERENCE_P, angle_scale=180.0 / math.pi,
                  reference_bounds: RobustnessBounds | None = None):
    """Everything the harness needs from the design step, as plain data."""
    params = params or plant.TurbineParams()
    op = op or OperatingPoint()
    reference_bounds = reference_bounds or RobustnessBounds.reference()
    fit = fit_p(p_bar, op, params)
    fitted = fit.params(params)
    computed = bound_rho(op, fitted, angle_scale=angle_scale)
    local = bound_rho(op.local(), fitted, angle_scale=angle_scale)
    out = {
        "fit": {"p1": fit.p1, "p2": fit.p2, "p3": fit.p3, "q": fit.q,
                "residual": fit.residual, "distance": fit.distance, "p_bar": list(p_bar)},
        "operating_point": {"omega_r0": op.omega_r0, "nu0": op.nu0, "theta0": op.theta0,
                            "theta0_deg": math.degrees(op.theta0)},
        "bounds_reference": _bounds_dict(reference_bounds),
        "bounds_envelope": _bounds_dict(computed),
        "bounds_local": _bounds_dict(local),
        "psi": psi, "gamma": gamma, "k": k,
        "k_min": gain_bound(reference_bounds, psi, gamma),
        "k_min_arithmetic": gain_bound_arithmetic(reference_bounds, psi, gamma),
    }
    for name, b in (("k_min_envelope", computed), ("k_min_local", local)):
        out[name] = gain_bound(b, psi, gamma) if b.phi * b.mu > 0 else None
    return out


def _bounds_dict(b: RobustnessBounds):
    return {"rho_nu_bar": b.rho_nu_bar, "rho_omega_bar": b.rho_omega_bar, "phi": b.phi, "mu": b.mu}
