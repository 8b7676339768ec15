import math
from pathlib import Path

import numpy as np
import pytest

from windpitch import harness
from windpitch.errors import (ConfigError, IncompatibleTraceError, IntegrationDivergedError,
                              SingularityError)
from windpitch.harness import FaultSchedule, Scenario, SimTrace, fault_factors, sim
from windpitch.harness import metrics as M
from windpitch.harness.backend import LOOPS
from windpitch.harness.scenario import from_dict
from windpitch.wind import WindProfile

SCENARIOS = Path(harness.__file__).resolve().parent.parent / "scenarios"
STEP = WindProfile.step_sequence([(0, 22), (60, 18), (130, 24), (200, 16), (240, 22),
                                  (320, 14), (420, 20), (520, 22)])


def test_fault_factors_examples():
    fs = FaultSchedule(delta_full=0.5, rho_full=0.8)
    assert fault_factors(fs, 100.0) == (1.0, 1.0)
    assert fault_factors(fs, 200.0) == (0.5, 0.8)
    d, r = fault_factors(fs, 165.0)
    assert d == pytest.approx(0.75) and r == pytest.approx(0.9)
    assert fault_factors(fs, 300.0) == (1.0, 1.0)
    assert fault_factors(None, 200.0) == (1.0, 1.0)
    d, r = fault_factors(fs, np.array([0.0, 235.0]))
    np.testing.assert_allclose(d, [1.0, 0.75])


def test_fault_schedule_validation():
    with pytest.raises(ConfigError):
        FaultSchedule(t_full_start=140.0)
    with pytest.raises(ConfigError):
        FaultSchedule(delta_full=0.0)
    with pytest.raises(ConfigError):
        FaultSchedule(blades=(4,))
    np.testing.assert_array_equal(FaultSchedule(blades=(2,)).mask, [0, 1, 0])


def test_rms_examples():
    t = np.linspace(0, 10, 1001)
    assert M.rms(t, np.full_like(t, 0.3)) == pytest.approx(0.3, rel=1e-14)
    s = 2.0 * np.sin(2 * math.pi * t)
    assert M.rms(t, s) == pytest.approx(2.0 / math.sqrt(2), rel=1e-4)


def _synthetic_trace(err, t):
    data = np.zeros((len(t), len(SimTrace.columns)))
    data[:, 0] = t
    data[:, SimTrace.columns.index("omega_err")] = err
    data[:, SimTrace.columns.index("nu")] = 22.0
    return SimTrace(data, {"name": "synthetic"})


def test_metrics_self_reference_and_grid():
    t = np.linspace(0, 300, 3001)
    tr = _synthetic_trace(0.01 * np.sin(t), t)
    m = M.metrics(tr, tr)
    assert m.relative_rms == pytest.approx(100.0)
    assert m.relative_rms_fault_window == pytest.approx(100.0)
    other = _synthetic_trace(np.zeros(101), np.linspace(0, 300, 101))
    with pytest.raises(IncompatibleTraceError):
        M.metrics(tr, other)


def test_fault_window_missing_is_none():
    t = np.linspace(0, 100, 101)
    assert M.metrics(_synthetic_trace(np.zeros_like(t), t)).rms_fault_window is None


def _short(**kw):
    base = dict(duration=30.0, wind=WindProfile.stochastic(seed=7))
    base.update(kw)
    return Scenario(**base)


def test_equilibrium_hold():
    sc = Scenario(duration=600.0, wind=WindProfile.stochastic(ti=0.0))
    tr = sim.run(sc)
    assert np.max(np.abs(tr["omega_err"])) < 1e-6
    assert abs(M.dissipation_monitor(tr)) < 1e-9


def test_determinism_bytes(tmp_path):
    sc = _short(fault=FaultSchedule(5, 10, 15, 20))
    a = sim.run(sc).to_csv(tmp_path / "a.csv")
    b = sim.run(sc).to_csv(tmp_path / "b.csv")
    assert Path(a).read_bytes() == Path(b).read_bytes()


@pytest.mark.skipif("cython" not in LOOPS, reason="compiled kernel not built")
@pytest.mark.parametrize("controller", ["proposed", "baseline"])
def test_backend_parity(controller):
    sc = _short(duration=10.0, controller=controller, fault=FaultSchedule(2, 4, 6, 8),
                noise_std=1e-3, noise_seed=3)
    a = sim.run(sc, backend="python")
    b = sim.run(sc, backend="cython")
    np.testing.assert_array_equal(a.data, b.data)


def test_step_wind_l2_ratio():
    tr = sim.run(Scenario(wind=STEP, fault=FaultSchedule(),
                          high=harness.Scenario().high.__class__(integral_limit=None)))
    assert M.l2_ratio(tr) <= 0.25
    assert M.dissipation_monitor(tr) >= -1e-3


def test_detuned_monitor_is_diagnostic():
    from windpitch.ctrl_high import HighLevelGains
    tr = sim.run(_short(high=HighLevelGains(k=1.0, integral_limit=None)))
    assert math.isfinite(M.dissipation_monitor(tr))


def test_trace_csv_round_trip(tmp_path):
    tr = sim.run(_short(duration=5.0))
    back = SimTrace.from_csv(tr.to_csv(tmp_path / "t.csv"))
    np.testing.assert_array_equal(back.data, tr.data)
    assert back.meta == tr.meta
    assert back.meta["wind_seed"] == 7


def test_trace_csv_rejects_other_columns(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("t,foo\n0,1\n")
    with pytest.raises(IncompatibleTraceError):
        SimTrace.from_csv(p)


def test_trace_grid_and_columns():
    tr = sim.run(_short(duration=2.0))
    assert len(tr) == 201
    np.testing.assert_allclose(np.diff(tr.t), 0.01)
    assert tr.blades("theta").shape == (201, 3)
    assert np.all(np.isfinite(tr.data))


def test_singularity_is_stamped():
    sc = _short(duration=60.0, wind=WindProfile.step_sequence([(0, 11.4)]))
    init = sim.initial_state(sc)
    init[0] = 0.2
    init[1:4] = 1.5
    with pytest.raises(SingularityError) as exc:
        sim.run(sc, init=init)
    assert exc.value.t is not None and 0 < exc.value.t < 60


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@pytest.mark.parametrize("backend", sorted(LOOPS))
def test_divergence_is_stamped(backend):
    sc = _short()
    init = sim.initial_state(sc)
    init[4] = 1e308
    with pytest.raises(IntegrationDivergedError) as exc:
        sim.run(sc, backend=backend, init=init)
    assert exc.value.t == 0.0


def test_coarse_step_aborts():
    # the low-level loop is far too stiff for a 20 ms step
    with pytest.raises((IntegrationDivergedError, SingularityError)):
        sim.run(_short(dt=0.02))


def test_low_level_monitor_and_table():
    sc = _short(fault=FaultSchedule(5, 10, 15, 20))
    tr = sim.run(sc)
    assert math.isfinite(M.low_level_lyapunov_increase(tr))
    rows = M.relative_rms_table({"a": tr, "b": sim.run(sc.replace(controller="baseline"))}, "b",
                                window=(5, 20))
    assert rows[1][1] == pytest.approx(100.0)


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_scenarios_load(path):
    sc = harness.load(path)
    assert sc.name == path.stem
    assert Path(sc.trace_csv).parent == path.parent


@pytest.mark.parametrize("cfg", [
    {"sim": {"bogus": 1}},
    {"nonsense": {}},
    {"sim": {"controller": "lqr"}},
    {"sim": {"dt": -1.0}},
    {"gains": {"high": {"angle_unit": "grad"}}},
    {"gains": {"high": {"integral_limit": True}}},
    {"wind": {"kind": "step"}},
    {"fault": {"t_full_start": 100.0}},
    {"turbine": {"J": "heavy"}},
])
def test_config_errors(cfg):
    with pytest.raises(ConfigError):
        from_dict(cfg)


def test_config_options(tmp_path):
    sc = from_dict({"gains": {"high": {"integral_limit": False, "angle_unit": "rad"},
                              "low": {"eta_max": 1.0}},
                    "turbine": {"theta0_deg": 19.94, "fit_coefficients": False},
                    "sim": {"trace_csv": "out.csv"}}, base_dir=tmp_path)
    assert sc.high.integral_limit is None and sc.high.angle_scale == 1.0
    assert sc.low.eta_max == 1.0
    assert sc.op.theta0 == pytest.approx(math.radians(19.94))
    assert sc.plant_params() == sc.turbine
    assert sc.trace_csv == str(tmp_path / "out.csv")


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        harness.load(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[sim\nduration = 1")
    with pytest.raises(ConfigError):
        harness.load(bad)


def test_backend_env_selection():
    import subprocess
    import sys
    code = "from windpitch.harness import backend; print(backend.DEFAULT)"
    env = dict(__import__("os").environ, WINDPITCH_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
    env["WINDPITCH_BACKEND"] = "fortran"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.returncode != 0 and "WINDPITCH_BACKEND" in out.stderr


def test_unknown_backend():
    from windpitch.harness.backend import get_loop
    with pytest.raises(ValueError):
        get_loop("fortran")


def test_run_batch_matches_serial():
    scs = [_short(wind=WindProfile.stochastic(seed=s)) for s in (3, 1, 2)]
    par = harness.run_batch(scs, jobs=2)
    for sc, tr in zip(scs, par):
        assert np.array_equal(tr.data, sim.run(sc).data)
    assert [t.meta["wind_seed"] for t in par] == [3, 1, 2]


def test_run_batch_propagates_failure():
    bad = _short(dt=0.05, duration=30.0, wind=WindProfile.stochastic(seed=1))
    with pytest.raises((SingularityError, IntegrationDivergedError)):
        harness.run_batch([_short(), bad], jobs=2)


def test_numeric_errors_pickle():
    import pickle
    for exc in (SingularityError(0.01, 0.05, t=3.0), IntegrationDivergedError(t=1.5)):
        back = pickle.loads(pickle.dumps(exc))
        assert type(back) is type(exc) and str(back) == str(exc) and back.t == exc.t
