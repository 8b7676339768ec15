"""Command-line interface.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure
(plant singularity or divergence).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, design, plant, wind
from .ctrl_high import RobustnessBounds, gain_bound
from .errors import (ConfigError, DegenerateConicError, IncompatibleTraceError,
                     InfeasibleFitError, IntegrationDivergedError, InvalidBoundsError,
                     OutOfRangeError, SingularityError)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_CONFIG_ERRORS = (ConfigError, IncompatibleTraceError, InvalidBoundsError, DegenerateConicError,
                  InfeasibleFitError, OutOfRangeError, OSError, ValueError)
_NUMERIC_ERRORS = (SingularityError, IntegrationDivergedError)


def _emit(obj, as_json=True, out=None):
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    else:
        out.write(str(obj) + "\n")


# -- simulate / compare -------------------------------------------------------

def _output_path(configured, out_dir, default):
    """Configured path, else ``default``; ``out_dir`` keeps only the file name."""
    path = Path(configured) if configured else Path(default)
    return Path(out_dir) / path.name if out_dir else path


def _run_scenario(path, backend):
    from .harness import load, run
    sc = load(path)
    return sc, run(sc, backend=backend)


def _write_outputs(sc, trace, args):
    from .harness.metrics import metrics
    csv_path = _output_path(sc.trace_csv, args.out_dir, f"{sc.name}.csv")
    json_path = _output_path(sc.metrics_json, args.out_dir, csv_path.with_suffix(".json"))
    trace.to_csv(csv_path)
    report = metrics(trace, window=sc.fault_window).to_dict()
    report["scenario"] = sc.summary()
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    svg = args.plot or sc.plot_svg
    if svg:
        from .plotting import plot_trace
        plot_trace(trace, _output_path(svg, args.out_dir, svg), title=sc.name)
    return {"trace": str(csv_path), "metrics": str(json_path), **{
        k: report[k] for k in ("rms", "rms_fault_window", "max_abs_error", "l2_ratio",
                               "dissipation_margin")}}


def cmd_simulate(args):
    from .harness import load
    from .harness.sim import run_batch
    if args.plot and len(args.scenario) > 1:
        raise ConfigError("--plot takes a single scenario; set plot_svg in each file instead")
    scenarios = [load(p) for p in args.scenario]
    traces = run_batch(scenarios, backend=args.backend, jobs=args.jobs)
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    summaries = [_write_outputs(sc, tr, args) for sc, tr in zip(scenarios, traces)]
    _emit(summaries[0] if len(summaries) == 1 else summaries)
    return EXIT_OK


def _load_any(path, backend):
    from .harness import SimTrace
    if str(path).endswith(".csv"):
        tr = SimTrace.from_csv(path)
        return tr.meta.get("name", Path(path).stem), tr, None
    sc, tr = _run_scenario(path, backend)
    return sc.name, tr, sc


def cmd_compare(args):
    from .harness.metrics import metrics
    name_a, tr_a, sc_a = _load_any(args.a, args.backend)
    name_b, tr_b, _ = _load_any(args.b, args.backend)
    window = tuple(args.window) if args.window else (sc_a.fault_window if sc_a else (150.0, 250.0))
    ref = metrics(tr_b, window=window)
    rows = []
    for name, tr in ((name_a, tr_a), (name_b, tr_b)):
        m = metrics(tr, tr_b, window=window)
        rows.append({"name": name, "rms": m.rms, "rms_fault_window": m.rms_fault_window,
                     "relative_rms": m.relative_rms,
                     "relative_rms_fault_window": m.relative_rms_fault_window})
    if args.json:
        _emit({"reference": name_b, "window": list(window), "rows": rows})
        return EXIT_OK
    fmt = lambda v, spec: "-" if v is None or (isinstance(v, float) and math.isnan(v)) else format(v, spec)  # noqa: E731
    print(f"relative RMS of the rotor speed error (reference: {name_b}, "
          f"fault window {window[0]:g}-{window[1]:g} s)")
    print(f"{'scenario':<28}{'RMS':>12}{'RMS window':>12}{'rel %':>9}{'rel % win':>11}")
    for r in rows:
        print(f"{r['name']:<28}{fmt(r['rms'], '.5g'):>12}{fmt(r['rms_fault_window'], '.5g'):>12}"
              f"{fmt(r['relative_rms'], '.2f'):>9}{fmt(r['relative_rms_fault_window'], '.2f'):>11}")
    if ref.rms == 0:
        print("note: reference RMS is zero; relative values are undefined")
    return EXIT_OK


# -- design -------------------------------------------------------------------

def _design_inputs(args):
    params, op = plant.TurbineParams(), design.OperatingPoint()
    if getattr(args, "config", None):
        from .harness import load
        sc = load(args.config)
        params, op = sc.turbine, sc.op
    return params, op


def cmd_fit_p(args):
    params, op = _design_inputs(args)
    p_bar = (args.p1, args.p2, args.p3)
    fit = design.fit_p(p_bar, op, params)
    _emit({"p1": fit.p1, "p2": fit.p2, "p3": fit.p3, "q": fit.q,
           "residual": fit.residual, "distance": fit.distance, "p_bar": list(p_bar)})
    return EXIT_OK


def cmd_bounds(args):
    params, op = _design_inputs(args)
    fitted = design.fitted_params(params, op)
    if args.local:
        op = op.local()
    b = design.bound_rho(op, fitted, n=args.n)
    out = design._bounds_dict(b)
    out["envelope"] = {"nu": list(op.envelope.nu), "omega_r": list(op.envelope.omega_r),
                       "theta": list(op.envelope.theta), "n": args.n or op.envelope.n}
    out["k_min"] = gain_bound(b, args.psi, args.gamma) if b.phi * b.mu > 0 else None
    _emit(out)
    return EXIT_OK


def cmd_gain_bound(args):
    b = RobustnessBounds(args.rho_nu, args.rho_omega, args.phi, args.mu)
    k = gain_bound(b, args.psi, args.gamma)
    if args.json:
        _emit({"k_min": k, "arithmetic": design.gain_bound_arithmetic(b, args.psi, args.gamma)})
    else:
        print(design.gain_bound_arithmetic(b, args.psi, args.gamma))
        print(f"k_min = {k:.4f}")
    return EXIT_OK


def cmd_report(args):
    params, op = _design_inputs(args)
    _emit(design.design_report(params, op, psi=args.psi, gamma=args.gamma))
    return EXIT_OK


# -- wind / plot --------------------------------------------------------------

def cmd_wind_gen(args):
    prof = wind.WindProfile.stochastic(mean=args.mean, ti=args.ti, seed=args.seed,
                                       correlation_time=args.correlation_time,
                                       sample_dt=args.dt)
    s = wind.series(prof, args.duration, clamp=not args.no_clamp)
    t = s.t[s.t <= args.duration + 1e-9]
    v = s.v[: len(t)]
    meta = {"seed": args.seed, "mean": args.mean, "ti": args.ti,
            "correlation_time": args.correlation_time}
    if args.output:
        wind.write_csv(args.output, t, v, **meta)
    else:
        sys.stdout.writelines(wind.format_csv(t, v, meta))
    return EXIT_OK


def cmd_plot(args):
    from .harness import SimTrace
    from .plotting import plot_trace
    trace = SimTrace.from_csv(args.trace)
    out = Path(args.output) if args.output else Path(args.trace).with_suffix(".svg")
    signals = [s.strip() for s in args.signals.split(",")] if args.signals else None
    plot_trace(trace, out, signals=signals, title=trace.meta.get("name"))
    print(out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="windpitch", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    backends = ("python", "cython")
    s = sub.add_parser("simulate", help="run a scenario file and write trace, metrics, plot")
    s.add_argument("scenario", nargs="+", help="one or more scenario TOML files")
    s.add_argument("-j", "--jobs", type=int, default=1,
                   help="run several scenarios in this many worker processes")
    s.add_argument("--out-dir", help="directory for outputs (overrides scenario paths)")
    s.add_argument("--plot", help="also write an SVG plot to this path")
    s.add_argument("--backend", choices=backends)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser(
        "compare", help="relative-RMS table of A against reference B",
        description="Relative RMS of the rotor-speed error of A against reference B (B = 100%). "
                    "Magnitudes depend on the reduced plant model; read the table for "
                    "ordering, not as full-turbine performance figures.")
    c.add_argument("a", help="scenario TOML or trace CSV")
    c.add_argument("b", help="reference scenario TOML or trace CSV")
    c.add_argument("--window", nargs=2, type=float, metavar=("T0", "T1"),
                   help="fault window for the windowed columns (default: scenario's, else 150 250)")
    c.add_argument("--json", action="store_true", help="machine-readable output")
    c.add_argument("--backend", choices=backends)
    c.set_defaults(func=cmd_compare)

    d = sub.add_parser("design", help="controller design calculations")
    dsub = d.add_subparsers(dest="design_command", required=True)
    f = dsub.add_parser("fit-p", help="fit p1..p3 so the operating point is an equilibrium")
    f.add_argument("--p1", type=float, default=design.REFERENCE_P[0])
    f.add_argument("--p2", type=float, default=design.REFERENCE_P[1])
    f.add_argument("--p3", type=float, default=design.REFERENCE_P[2])
    f.add_argument("--config", help="scenario TOML supplying turbine and operating point")
    f.set_defaults(func=cmd_fit_p)
    b = dsub.add_parser("bounds", help="grid bounds on the rotor-model partials")
    b.add_argument("--config")
    b.add_argument("--local", action="store_true", help="use a small envelope around the operating point")
    b.add_argument("--n", type=int, default=None, help="grid points per axis")
    b.add_argument("--psi", type=float, default=0.5)
    b.add_argument("--gamma", type=float, default=0.25)
    b.set_defaults(func=cmd_bounds)
    g = dsub.add_parser("gain-bound", help="smallest admissible high-level gain k")
    g.add_argument("--rho-nu", type=float, default=1.0)
    g.add_argument("--rho-omega", type=float, default=1.5)
    g.add_argument("--phi", type=float, default=0.15)
    g.add_argument("--mu", type=float, default=1.0)
    g.add_argument("--psi", type=float, default=0.5)
    g.add_argument("--gamma", type=float, default=0.25)
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gain_bound)
    r = dsub.add_parser("report", help="full design report as JSON")
    r.add_argument("--config")
    r.add_argument("--psi", type=float, default=0.5)
    r.add_argument("--gamma", type=float, default=0.25)
    r.set_defaults(func=cmd_report)

    w = sub.add_parser("wind", help="wind signal tools")
    wsub = w.add_subparsers(dest="wind_command", required=True)
    wg = wsub.add_parser("gen", help="generate a turbulent wind series as t,v CSV")
    wg.add_argument("--mean", type=float, default=22.0)
    wg.add_argument("--ti", type=float, default=0.20)
    wg.add_argument("--seed", type=int, default=0)
    wg.add_argument("--duration", type=float, default=600.0)
    wg.add_argument("--correlation-time", type=float, default=10.0)
    wg.add_argument("--dt", type=float, default=0.01)
    wg.add_argument("--no-clamp", action="store_true")
    wg.add_argument("-o", "--output")
    wg.set_defaults(func=cmd_wind_gen)

    pl = sub.add_parser("plot", help="SVG plot of a trace CSV")
    pl.add_argument("trace")
    pl.add_argument("-o", "--output")
    pl.add_argument("--signals", help="comma-separated column names")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
