"""Closed-loop simulation runner and the trace it produces."""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import wind as wind_mod
from .._layout import BASELINE, COLUMNS, DIVERGED, PARAM_NAMES, PROPOSED, SINGULAR
from ..baseline import bumpless_integral
from ..errors import IncompatibleTraceError, IntegrationDivergedError, SingularityError
from ..plant import OMEGA_FLOOR
from . import backend as _backend
from .faults import fault_factors
from .scenario import Scenario

_INF = math.inf


class SimTrace:
    """Time-indexed record of plant, controller and monitor signals.

    Columns follow :data:`windpitch._layout.COLUMNS`; index with the column
    name (``trace["omega_err"]``).
    """

    columns = COLUMNS

    def __init__(self, data, meta=None):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(COLUMNS):
            raise ValueError(f"trace data must have shape (n, {len(COLUMNS)})")
        self.data = data
        self.meta = dict(meta or {})
        self._index = {c: i for i, c in enumerate(COLUMNS)}

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name):
        return self.data[:, self._index[name]]

    @property
    def t(self):
        return self["t"]

    def blades(self, prefix):
        return np.stack([self[f"{prefix}_{j}"] for j in (1, 2, 3)], axis=1)

    def window(self, t0, t1):
        m = (self.t >= t0 - 1e-9) & (self.t <= t1 + 1e-9)
        return SimTrace(self.data[m], self.meta)

    def to_csv(self, path):
        """Header comment with run metadata, a column header, then one row per sample."""
        with open(path, "w", newline="\n") as fh:
            fh.write("# " + json.dumps(self.meta, sort_keys=True) + "\n")
            fh.write(",".join(COLUMNS) + "\n")
            np.savetxt(fh, self.data, fmt="%.17g", delimiter=",")
        return path

    @classmethod
    def from_csv(cls, path):
        meta = {}
        with open(path) as fh:
            first = fh.readline()
            if first.startswith("#"):
                meta = json.loads(first[1:])
                header = fh.readline()
            else:
                header = first
            cols = tuple(h.strip() for h in header.split(","))
            if cols != COLUMNS:
                raise IncompatibleTraceError(f"{path}: unexpected trace columns")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(data, meta)


def pack_params(sc: Scenario, turbine=None):
    tp = turbine or sc.plant_params()
    hi, lo, pi, act, op = sc.high, sc.low, sc.pi, sc.actuator, sc.op
    values = {
        "dt": sc.dt, "kappa": tp.kappa, "J": tp.J, "P0": tp.P0,
        "p1": tp.p1, "p2": tp.p2, "p3": tp.p3, "theta_max": tp.theta_max,
        "aero_scale": tp.aero_pitch_scale,
        "zeta0": act.zeta0, "omega_n0": act.omega_n0,
        "rate_limit": _INF if act.rate_limit is None else act.rate_limit,
        "omega_r0": op.omega_r0, "theta0": op.theta0, "nu0": op.nu0,
        "k": hi.k, "psi": hi.psi, "gamma": hi.gamma, "u_high": hi.angle_scale,
        "integral_limit": _INF if hi.integral_limit is None else hi.integral_limit,
        "rho0_1": hi.rho0[0], "rho0_2": hi.rho0[1], "rho0_3": hi.rho0[2],
        "k_theta": lo.k_theta, "alpha": lo.alpha, "u_low": lo.angle_scale,
        "eta_max": _INF if lo.eta_max is None else lo.eta_max,
        "kp0": pi.kp0, "ki0": pi.ki0, "theta_k": pi.theta_k,
    }
    return np.array([float(values[n]) for n in PARAM_NAMES])


def initial_state(sc: Scenario):
    """Equilibrium start: rated speed, operating pitch, zero estimates."""
    th0 = sc.op.theta0
    pi_int = bumpless_integral(th0, sc.pi) if sc.controller == "baseline" else 0.0
    return np.array([sc.op.omega_r0, th0, th0, th0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, pi_int])


def inputs(sc: Scenario):
    """Per-step wind, fault factors and measurement noise on the plant grid."""
    n = sc.n_steps
    t = np.arange(n) * sc.dt
    nu = wind_mod.series(sc.wind, sc.duration)(t)
    delta, rho = fault_factors(sc.fault, t)
    if sc.noise_std > 0:
        rng = np.random.Generator(np.random.PCG64(sc.noise_seed))
        noise = sc.noise_std * rng.standard_normal(n)
    else:
        noise = np.zeros(n)
    return np.asarray(nu, dtype=float), delta, rho, noise


def run(sc: Scenario, backend=None, init=None) -> SimTrace:
    """Simulate ``sc`` and return its trace; deterministic for a given scenario."""
    loop = _backend.get_loop(backend)
    nu, delta, rho, noise = inputs(sc)
    mask = sc.fault.mask if sc.fault is not None else np.zeros(3, dtype=np.intp)
    rec, status, fail, final = loop(
        pack_params(sc), initial_state(sc) if init is None else init, nu, delta, rho, noise,
        mask, sc.n_steps, int(sc.ctrl_every), int(sc.record_every),
        BASELINE if sc.controller == "baseline" else PROPOSED,
    )
    if status == SINGULAR:
        raise SingularityError(float(final[0]), OMEGA_FLOOR, t=fail * sc.dt)
    if status == DIVERGED:
        raise IntegrationDivergedError(t=fail * sc.dt)
    return SimTrace(rec, sc.summary())


def run_batch(scenarios, backend=None, jobs=None):
    """Run independent scenarios, in worker processes when ``jobs > 1``.

    Traces come back in input order and are identical to serial runs.  The
    first failing scenario's error is raised.
    """
    scenarios = list(scenarios)
    if not jobs or jobs <= 1 or len(scenarios) <= 1:
        return [run(sc, backend=backend) for sc in scenarios]
    with ProcessPoolExecutor(max_workers=min(jobs, len(scenarios))) as pool:
        futures = [pool.submit(run, sc, backend) for sc in scenarios]
        return [f.result() for f in futures]
