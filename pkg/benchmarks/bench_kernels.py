"""Compiled vs plain-Python timings of the hot kernels and of a full scenario.

    python benchmarks/bench_kernels.py [--repeat N] [--scenario NAME]

Kernel timings call the numba dispatcher and its ``.py_func`` side by side in
one process.  The scenario timing starts two subprocesses, one with
``CASCADE_INDI_NUMBA=0``, so the whole loop is measured both ways.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cascade_indi import USE_NUMBA
from cascade_indi.mathutil import actuator_step_k, biquad_step_k, bilinear_coefficients, quat_mul_k, rotmat_k
from cascade_indi.sim.dynamics import Plant, derivative_k, rk4_k
from cascade_indi.sim.vehicle import VehicleParams, VehicleState

SCENARIO_SNIPPET = """
import time
from cascade_indi.config import load_config
from cascade_indi.sim.scenario import run_scenario
cfg = load_config({name!r})
run_scenario(cfg.replace(scenario={{"duration": 0.1}}))  # compile / warm caches
t = time.perf_counter()
tr = run_scenario(cfg)
print((time.perf_counter() - t) / len(tr))
"""


def kernel_cases():
    prm = VehicleParams()
    plant = Plant(prm)
    state = VehicleState.hover(prm, xi=(0.0, 0.0, -1.0))
    x = state.rigid_body()
    omega = state.omega
    domega = np.zeros(4)
    wind = np.array([1.0, 0.0, 0.0])
    q = np.array([0.9, 0.1, -0.2, 0.3])
    q /= np.linalg.norm(q)
    coeffs = bilinear_coefficients(50.0, 0.55, 1 / 512)
    s1, s2 = np.zeros(4), np.zeros(4)
    sample = np.ones(4)
    args = (plant.p, plant.rx, plant.ry, plant.spin)
    return {
        "quat_mul_k": (quat_mul_k, (q, q)),
        "rotmat_k": (rotmat_k, (q,)),
        "biquad_step_k": (biquad_step_k, (coeffs, s1, s2, sample)),
        "actuator_step_k": (actuator_step_k, (omega, omega + 10.0, 0.1, 150.0, 800.0)),
        "derivative_k": (derivative_k, (x, omega, domega, wind, *args)),
        "rk4_k": (rk4_k, (x, omega, domega, wind, *args, 1 / 512)),
    }


def bench_kernels(repeat):
    print(f"{'kernel':<18}{'compiled us':>14}{'python us':>14}{'speedup':>10}")
    for name, (fn, args) in kernel_cases().items():
        fn(*args)  # trigger compilation outside the timing
        jit_t = min(timeit.repeat(lambda: fn(*args), number=repeat, repeat=3)) / repeat
        py_t = min(timeit.repeat(lambda: fn.py_func(*args), number=repeat, repeat=3)) / repeat
        print(f"{name:<18}{jit_t * 1e6:>14.2f}{py_t * 1e6:>14.2f}{py_t / jit_t:>10.1f}")


def bench_scenario(name):
    per_tick = {}
    for label, flag in (("compiled", "1"), ("python", "0")):
        env = dict(os.environ, CASCADE_INDI_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", SCENARIO_SNIPPET.format(name=name)],
                             env=env, check=True, capture_output=True, text=True)
        per_tick[label] = float(out.stdout.strip().splitlines()[-1])
    print(f"\nscenario {name}: compiled {per_tick['compiled'] * 1e6:.1f} us/tick, "
          f"python {per_tick['python'] * 1e6:.1f} us/tick, "
          f"speedup {per_tick['python'] / per_tick['compiled']:.2f}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=2000)
    p.add_argument("--scenario", default="windtunnel-indi")
    args = p.parse_args()
    if not USE_NUMBA:
        print("numba disabled in this process; kernel columns measure the same function")
    bench_kernels(args.repeat)
    bench_scenario(args.scenario)


if __name__ == "__main__":
    main()
