"""Wind-speed signals for the full-load region.

Three profile kinds are supported:

* ``step``: piecewise-constant (zero-order hold) sequence of (time, speed) points
* ``stochastic``: Ornstein-Uhlenbeck turbulence around a mean, with stationary
  standard deviation ``ti * mean`` and correlation time ``correlation_time``
* ``file``: a two-column ``t,v`` CSV series, linearly interpolated

Every emitted sample is clamped to the full-load envelope ``[v_min, v_max]``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, OutOfRangeError

V_MIN = 11.4
V_MAX = 25.0

KINDS = ("step", "stochastic", "file")


@dataclass(frozen=True)
class WindProfile:
    kind: str = "stochastic"
    steps: tuple = ()
    mean: float = 22.0
    ti: float = 0.20
    correlation_time: float = 10.0
    seed: int = 0
    #: grid spacing of the generated turbulence series [s]
    sample_dt: float = 0.01
    path: str | None = None
    v_min: float = V_MIN
    v_max: float = V_MAX

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown wind kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "step":
            if not self.steps:
                raise ConfigError("step wind profile needs at least one (time, speed) point")
            times = [float(t) for t, _ in self.steps]
            if times[0] > 0 or any(b <= a for a, b in zip(times, times[1:])):
                raise ConfigError("step times must start at <= 0 and strictly increase")
        if self.kind == "stochastic":
            if self.mean <= 0 or self.ti < 0 or self.correlation_time <= 0 or self.sample_dt <= 0:
                raise ConfigError("stochastic wind needs mean > 0, ti >= 0, correlation_time > 0")
        if self.kind == "file" and not self.path:
            raise ConfigError("file wind profile needs a path")
        if self.v_min >= self.v_max:
            raise ConfigError("v_min must be below v_max")

    @classmethod
    def step_sequence(cls, points, **kw):
        return cls(kind="step", steps=tuple((float(t), float(v)) for t, v in points), **kw)

    @classmethod
    def stochastic(cls, mean=22.0, ti=0.20, correlation_time=10.0, seed=0, **kw):
        return cls(kind="stochastic", mean=mean, ti=ti,
                   correlation_time=correlation_time, seed=seed, **kw)

    @classmethod
    def from_file(cls, path, **kw):
        return cls(kind="file", path=str(path), **kw)


@dataclass
class WindSeries:
    t: np.ndarray
    v: np.ndarray
    hold: bool = False
    meta: dict = field(default_factory=dict)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0] - 1e-12) or np.any(t > self.t[-1] + 1e-9):
            raise OutOfRangeError(
                f"wind requested outside [{self.t[0]:g}, {self.t[-1]:g}] s"
            )
        if self.hold:
            idx = np.searchsorted(self.t, t, side="right") - 1
            out = self.v[np.clip(idx, 0, len(self.v) - 1)]
        else:
            out = np.interp(t, self.t, self.v)
        return out if out.ndim else float(out)


def ou_deviation(n, dt, std, correlation_time, seed):
    """Zero-started OU deviation on an ``n``-point grid (exact discretisation).

    Prefix-stable: the first ``m`` values do not depend on ``n >= m``.
    """
    if std == 0.0 or n == 0:
        return np.zeros(n)
    a = math.exp(-dt / correlation_time)
    rng = np.random.Generator(np.random.PCG64(seed))
    e = rng.standard_normal(n)
    e[0] = 0.0
    return lfilter([std * math.sqrt(1.0 - a * a)], [1.0, -a], e)


def series(profile: WindProfile, duration, clamp=True) -> WindSeries:
    """Generate the wind signal covering ``[0, duration]``."""
    if profile.kind == "step":
        t = np.array([max(0.0, s[0]) for s in profile.steps])
        v = np.array([s[1] for s in profile.steps], dtype=float)
        out = WindSeries(np.append(t, max(duration, t[-1])), np.append(v, v[-1]), hold=True)
    elif profile.kind == "stochastic":
        n = int(math.ceil(duration / profile.sample_dt - 1e-9)) + 1
        t = np.arange(n) * profile.sample_dt
        v = profile.mean + ou_deviation(n, profile.sample_dt, profile.ti * profile.mean,
                                        profile.correlation_time, profile.seed)
        out = WindSeries(t, v, meta={"seed": profile.seed})
    else:
        out = read_csv(profile.path)
        if out.t[-1] < duration - 1e-9:
            raise OutOfRangeError(
                f"wind file {profile.path} ends at {out.t[-1]:g} s, before {duration:g} s"
            )
    if clamp:
        out.v = np.clip(out.v, profile.v_min, profile.v_max)
    return out


def sample(profile: WindProfile, t):
    """Wind speed at time(s) ``t`` >= 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be >= 0")
    horizon = float(t_arr.max()) if t_arr.size else 0.0
    if profile.kind == "file":
        horizon = 0.0  # range is checked against the file itself
    return series(profile, horizon)(t)


def read_csv(path) -> WindSeries:
    """Read a ``t,v`` series; leading ``#`` lines hold JSON metadata."""
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    while lines and lines[0].startswith("#"):
        try:
            meta.update(json.loads(lines.pop(0)[1:]))
        except ValueError:
            pass
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or [h.strip() for h in header[:2]] != ["t", "v"]:
        raise ConfigError(f"{path}: expected header 't,v'")
    try:
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not rows:
        raise ConfigError(f"{path}: no samples")
    arr = np.array(rows)
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise ConfigError(f"{path}: time column must strictly increase")
    return WindSeries(arr[:, 0], arr[:, 1], meta=meta)


def format_csv(t, v, meta=None):
    """Lines of a ``t,v`` series with an optional metadata comment first."""
    if meta:
        yield "# " + json.dumps(meta, sort_keys=True) + "\n"
    yield "t,v\n"
    for ti, vi in zip(np.asarray(t), np.asarray(v)):
        yield f"{float(ti)!r},{float(vi)!r}\n"


def write_csv(path, t, v, seed=None, **meta):
    """Write a ``t,v`` wind series; the seed goes into the metadata comment."""
    if seed is not None:
        meta["seed"] = int(seed)
    with open(path, "w", newline="") as fh:
        fh.writelines(format_csv(t, v, meta))
    return path
