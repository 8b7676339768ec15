"""Compare the compiled and pure-Python simulation loops.

    python benchmarks/bench_kernel.py [--duration 60] [--repeat 3]

Runs the same fault scenario on each available backend, checks the traces are
bit-identical and prints wall time and simulated-seconds-per-second.
"""
import argparse
import time

import numpy as np

from windpitch.harness import FaultSchedule, Scenario, sim
from windpitch.harness.backend import LOOPS
from windpitch.wind import WindProfile


def bench(sc, backend, repeat):
    best, trace = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = sim.run(sc, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, trace


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=60.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    fault = FaultSchedule(*(args.duration * f for f in (0.25, 0.3, 0.37, 0.42)))
    traces, walls = {}, {}
    print(f"{'backend':<10}{'controller':<12}{'wall [s]':>10}{'sim s / s':>12}")
    for controller in ("proposed", "baseline"):
        sc = Scenario(duration=args.duration, controller=controller, fault=fault,
                      wind=WindProfile.stochastic(seed=1))
        for name in sorted(LOOPS):
            wall, traces[name, controller] = bench(sc, name, args.repeat)
            walls[name, controller] = wall
            print(f"{name:<10}{controller:<12}{wall:>10.3f}{args.duration / wall:>12.0f}")
        if len(LOOPS) > 1:
            same = np.array_equal(traces["python", controller].data,
                                  traces["cython", controller].data)
            print(f"  bit-identical traces: {same}; speed-up "
                  f"{walls['python', controller] / walls['cython', controller]:.0f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
