"""Scenario description and its TOML form.

A scenario file has the sections ``[sim]``, ``[turbine]``, ``[actuator]``,
``[gains.high]``, ``[gains.low]``, ``[baseline]``, ``[wind]`` and ``[fault]``.
Every section and key is optional; unknown keys are rejected.
"""
from __future__ import annotations

import functools
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .. import design, plant
from ..baseline import PIGains
from ..ctrl_high import HighLevelGains
from ..ctrl_low import LowLevelGains
from ..errors import ConfigError
from ..wind import WindProfile
from .faults import FaultSchedule

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CONTROLLERS = ("proposed", "baseline")
ANGLE_UNITS = {"deg": 180.0 / math.pi, "rad": 1.0}
FAULT_WINDOW = (150.0, 250.0)


@functools.lru_cache(maxsize=32)
def _fitted(params: plant.TurbineParams, op: design.OperatingPoint):
    return design.fitted_params(params, op, p_bar=(params.p1, params.p2, params.p3))


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    duration: float = 600.0
    dt: float = 0.001
    controller: str = "proposed"
    ctrl_every: int = 1
    record_every: int = 10
    noise_std: float = 0.0
    noise_seed: int = 0
    wind: WindProfile = field(default_factory=WindProfile)
    fault: FaultSchedule | None = None
    turbine: plant.TurbineParams = field(default_factory=plant.TurbineParams)
    #: fit p1..p3 at the operating point before simulating
    fit_coefficients: bool = True
    actuator: plant.ActuatorParams = field(default_factory=plant.ActuatorParams)
    op: design.OperatingPoint = field(default_factory=design.OperatingPoint)
    high: HighLevelGains = field(default_factory=HighLevelGains)
    low: LowLevelGains = field(default_factory=LowLevelGains)
    pi: PIGains = field(default_factory=PIGains)
    fault_window: tuple = FAULT_WINDOW
    trace_csv: str | None = None
    metrics_json: str | None = None
    plot_svg: str | None = None

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ConfigError(f"controller must be one of {CONTROLLERS}, got {self.controller!r}")
        if not (self.dt > 0 and self.duration > 0):
            raise ConfigError("dt and duration must be positive")
        if int(self.ctrl_every) != self.ctrl_every or self.ctrl_every < 1:
            raise ConfigError("ctrl_every must be a positive integer (controller period = ctrl_every * dt)")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigError("record_every must be a positive integer")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")

    @property
    def n_steps(self):
        return int(round(self.duration / self.dt))

    def plant_params(self):
        if self.fit_coefficients:
            return _fitted(self.turbine, self.op)
        return self.turbine

    def replace(self, **kw):
        return replace(self, **kw)

    def summary(self):
        """Flat, JSON-friendly description recorded with every output."""
        w = self.wind
        out = {
            "name": self.name, "controller": self.controller, "duration": self.duration,
            "dt": self.dt, "ctrl_every": self.ctrl_every, "record_every": self.record_every,
            "wind_kind": w.kind, "noise_std": self.noise_std, "noise_seed": self.noise_seed,
            "nu0": self.op.nu0, "omega_r0": self.op.omega_r0, "theta0": self.op.theta0,
            "gamma": self.high.gamma, "psi": self.high.psi, "k": self.high.k,
        }
        if w.kind == "stochastic":
            out.update(wind_seed=w.seed, wind_mean=w.mean, wind_ti=w.ti,
                       wind_correlation_time=w.correlation_time)
        if self.fault is not None:
            out.update(fault_delta_full=self.fault.delta_full, fault_rho_full=self.fault.rho_full,
                       fault_blades=list(self.fault.blades))
        return out


_SECTIONS = {
    "sim": {"name", "duration", "dt", "controller", "ctrl_every", "record_every", "noise_std",
            "noise_seed", "trace_csv", "metrics_json", "plot_svg", "fault_window"},
    "turbine": {"kappa", "J", "P0", "p1", "p2", "p3", "theta_max_deg", "aero_pitch_scale",
                "omega_r0", "nu0", "theta0_deg", "fit_coefficients"},
    "actuator": {"zeta0", "omega_n0", "rate_limit"},
    "wind": {"kind", "mean", "ti", "correlation_time", "seed", "sample_dt", "steps", "path",
             "v_min", "v_max"},
    "fault": {"enabled", "t_start_ramp", "t_full_start", "t_full_end", "t_clear",
              "delta_full", "rho_full", "blades"},
    "baseline": {"kp0", "ki0", "theta_k"},
    "gains.high": {"k", "psi", "gamma", "rho0", "angle_unit", "integral_limit"},
    "gains.low": {"k_theta", "alpha", "angle_unit", "eta_max"},
}


def _pick(table, section):
    allowed = _SECTIONS[section]
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"[{section}] has unknown keys: {sorted(unknown)}")
    return dict(table)


def _optional_limit(value, name):
    if value is False or value is None:
        return None
    if value is True:
        raise ConfigError(f"{name} must be a number or false")
    return float(value)


def _angle_scale(unit, section):
    try:
        return ANGLE_UNITS[unit]
    except KeyError:
        raise ConfigError(f"[{section}] angle_unit must be 'deg' or 'rad', got {unit!r}") from None


def from_dict(cfg: dict, base_dir: Path | None = None) -> Scenario:
    """Build a scenario from a parsed TOML mapping."""
    cfg = dict(cfg)
    gains = cfg.pop("gains", {}) or {}
    for key in list(gains):
        cfg[f"gains.{key}"] = gains.pop(key)
    unknown = set(cfg) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    try:
        return _build(cfg, base_dir)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _build(cfg, base_dir):
    sim = _pick(cfg.get("sim", {}), "sim")
    tur = _pick(cfg.get("turbine", {}), "turbine")
    act = _pick(cfg.get("actuator", {}), "actuator")
    wnd = _pick(cfg.get("wind", {}), "wind")
    flt = _pick(cfg.get("fault", {}), "fault")
    bsl = _pick(cfg.get("baseline", {}), "baseline")
    hi = _pick(cfg.get("gains.high", {}), "gains.high")
    lo = _pick(cfg.get("gains.low", {}), "gains.low")

    op_kw = {}
    for key in ("omega_r0", "nu0"):
        if key in tur:
            op_kw[key] = float(tur.pop(key))
    if "theta0_deg" in tur:
        op_kw["theta0"] = math.radians(float(tur.pop("theta0_deg")))
    if "theta_max_deg" in tur:
        tur["theta_max"] = math.radians(float(tur.pop("theta_max_deg")))
    fit = bool(tur.pop("fit_coefficients", True))
    turbine = plant.TurbineParams(**{k: float(v) for k, v in tur.items()})
    env = design.Envelope(theta=(0.0, turbine.theta_max))
    op = design.OperatingPoint(envelope=env, **op_kw)

    if "rate_limit" in act:
        act["rate_limit"] = _optional_limit(act["rate_limit"], "rate_limit")
    actuator = plant.ActuatorParams(**act)

    if "steps" in wnd:
        wnd["steps"] = tuple((float(t), float(v)) for t, v in wnd["steps"])
    if "path" in wnd and base_dir is not None:
        p = Path(wnd["path"])
        wnd["path"] = str(p if p.is_absolute() else base_dir / p)
    wind = WindProfile(**wnd)

    fault = None
    if flt.pop("enabled", bool(flt)):
        if "blades" in flt:
            flt["blades"] = tuple(int(b) for b in flt["blades"])
        fault = FaultSchedule(**flt)

    hi_kw = {k: v for k, v in hi.items() if k not in ("angle_unit", "integral_limit", "rho0")}
    if "rho0" in hi:
        hi_kw["rho0"] = tuple(float(v) for v in hi["rho0"])
    if "integral_limit" in hi:
        hi_kw["integral_limit"] = _optional_limit(hi["integral_limit"], "integral_limit")
    high = HighLevelGains(
        theta0=op.theta0, theta_max=turbine.theta_max,
        angle_scale=_angle_scale(hi.get("angle_unit", "deg"), "gains.high"), **hi_kw,
    )
    lo_kw = {k: v for k, v in lo.items() if k not in ("angle_unit", "eta_max")}
    if "eta_max" in lo:
        lo_kw["eta_max"] = _optional_limit(lo["eta_max"], "eta_max")
    low = LowLevelGains(
        zeta0=actuator.zeta0, omega_n0=actuator.omega_n0,
        angle_scale=_angle_scale(lo.get("angle_unit", "deg"), "gains.low"), **lo_kw,
    )
    pi = PIGains(theta_max=turbine.theta_max, **bsl)

    if "fault_window" in sim:
        sim["fault_window"] = tuple(float(v) for v in sim["fault_window"])
    for key in ("trace_csv", "metrics_json", "plot_svg"):
        if key in sim and base_dir is not None:
            p = Path(sim[key])
            sim[key] = str(p if p.is_absolute() else base_dir / p)
    return Scenario(wind=wind, fault=fault, turbine=turbine, fit_coefficients=fit,
                    actuator=actuator, op=op, high=high, low=low, pi=pi, **sim)


def load(path) -> Scenario:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg.setdefault("sim", {}).setdefault("name", path.stem)
    return from_dict(cfg, base_dir=path.parent)
