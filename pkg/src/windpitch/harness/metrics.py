"""Trace metrics: RMS tables, L2 ratios, dissipation and Lyapunov monitors.

All integrals use the trapezoidal rule on the trace grid.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ..ctrl_high import storage
from ..errors import IncompatibleTraceError
from .scenario import FAULT_WINDOW
from .sim import SimTrace


def rms(t, x):
    """Time-weighted RMS of ``x`` sampled at ``t``."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(t) < 2:
        return float(abs(x[0])) if len(x) else math.nan
    return math.sqrt(trapezoid(x * x, t) / (t[-1] - t[0]))


def l2_norm(t, x):
    return math.sqrt(trapezoid(np.asarray(x, dtype=float) ** 2, t))


def l2_ratio(trace: SimTrace, nu0=None):
    """Empirical ||omega_err||_2 / ||nu - nu0||_2 over the whole trace."""
    nu0 = trace.meta.get("nu0", 22.0) if nu0 is None else nu0
    den = l2_norm(trace.t, trace["nu"] - nu0)
    num = l2_norm(trace.t, trace["omega_err"])
    return num / den if den > 0 else (0.0 if num == 0 else math.inf)


def dissipation_margin_series(trace: SimTrace, gamma=None, nu0=None):
    """V(t0) + integral(gamma^2 nu_err^2 - sigma^2) - V(t1), for every t1 on the grid."""
    gamma = trace.meta.get("gamma", 0.25) if gamma is None else gamma
    nu0 = trace.meta.get("nu0", 22.0) if nu0 is None else nu0
    psi = trace.meta.get("psi", 0.5)
    sigma = trace["sigma"]
    v = storage(sigma, trace["omega_int"], psi)
    supply = gamma**2 * (trace["nu"] - nu0) ** 2 - sigma**2
    return v[0] + cumulative_trapezoid(supply, trace.t, initial=0.0) - v


def dissipation_monitor(trace: SimTrace, gamma=None, nu0=None):
    """Worst dissipation-inequality margin along the trace (diagnostic only)."""
    return float(np.min(dissipation_margin_series(trace, gamma, nu0)))


@dataclass
class MetricsReport:
    rms: float
    rms_fault_window: float | None
    max_abs_error: float
    pitch_activity: float
    l2_ratio: float
    dissipation_margin: float
    relative_rms: float | None = None
    relative_rms_fault_window: float | None = None
    reference: str | None = None

    def to_dict(self):
        return asdict(self)


def _check_grid(a: SimTrace, b: SimTrace):
    if len(a) != len(b) or not np.array_equal(a.t, b.t):
        raise IncompatibleTraceError("traces do not share a time grid")


def _window_rms(trace: SimTrace, window):
    t0, t1 = window
    if trace.t[0] > t0 + 1e-9 or trace.t[-1] < t1 - 1e-9:
        return None
    w = trace.window(t0, t1)
    return rms(w.t, w["omega_err"])


def metrics(trace: SimTrace, reference: SimTrace | None = None, window=FAULT_WINDOW,
            gamma=None) -> MetricsReport:
    t = trace.t
    err = trace["omega_err"]
    activity = float(np.mean([trapezoid(np.abs(trace[f"theta_dot_{j}"]), t) for j in (1, 2, 3)]))
    report = MetricsReport(
        rms=rms(t, err),
        rms_fault_window=_window_rms(trace, window),
        max_abs_error=float(np.max(np.abs(err))),
        pitch_activity=activity,
        l2_ratio=l2_ratio(trace),
        dissipation_margin=dissipation_monitor(trace, gamma),
    )
    if reference is not None:
        _check_grid(trace, reference)
        ref = metrics(reference, window=window, gamma=gamma)
        report.relative_rms = 100.0 * report.rms / ref.rms if ref.rms > 0 else math.nan
        if report.rms_fault_window is not None and ref.rms_fault_window:
            report.relative_rms_fault_window = 100.0 * report.rms_fault_window / ref.rms_fault_window
        report.reference = reference.meta.get("name")
    return report


def low_level_lyapunov_increase(trace: SimTrace, blade=1):
    """Largest one-sample increase of the blade's low-level Lyapunov function."""
    v = trace[f"V_low_{blade}"]
    return float(np.max(np.diff(v))) if len(v) > 1 else 0.0


def eta_recovery(trace: SimTrace, t_after):
    """max |eta_hat_j| after ``t_after`` divided by the run peak, per blade."""
    after = trace.t >= t_after
    out = []
    for j in (1, 2, 3):
        eta = np.abs(trace[f"eta_hat_{j}"])
        peak = float(np.max(eta))
        out.append(float(np.max(eta[after])) / peak if peak > 0 else 0.0)
    return out


def relative_rms_table(traces: dict, reference: str, window=FAULT_WINDOW):
    """Rows of (name, whole-run %, fault-window %) relative to ``traces[reference]``."""
    ref = traces[reference]
    rows = []
    for name, tr in traces.items():
        m = metrics(tr, ref, window)
        rows.append((name, m.relative_rms, m.relative_rms_fault_window))
    return rows
