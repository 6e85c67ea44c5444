import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cascade_indi import USE_NUMBA
from cascade_indi.mathutil import (actuator_step_k, bilinear_coefficients, biquad_step_k, quat_mul_k,
                                   rotmat_k)
from cascade_indi.sim.dynamics import Plant, rk4_k
from cascade_indi.sim.vehicle import VehicleParams, VehicleState

unit = st.floats(-1, 1)
quats = st.tuples(unit, unit, unit, unit).filter(lambda q: np.linalg.norm(q) > 0.1).map(
    lambda q: np.array(q) / np.linalg.norm(q))


@given(quats, quats)
def test_quaternion_kernels_match_python(a, b):
    assert_allclose(quat_mul_k(a, b), quat_mul_k.py_func(a, b), atol=1e-15)
    assert_allclose(rotmat_k(a), rotmat_k.py_func(a), atol=1e-15)


@given(st.lists(st.floats(-100, 100), min_size=4, max_size=4))
def test_filter_and_actuator_kernels_match_python(sample):
    sample = np.array(sample)
    coeffs = bilinear_coefficients(50.0, 0.55, 1 / 512)
    s1a, s2a, s1b, s2b = (np.full(4, 0.3) for _ in range(4))
    assert_allclose(biquad_step_k(coeffs, s1a, s2a, sample), biquad_step_k.py_func(coeffs, s1b, s2b, sample),
                    atol=1e-12)
    assert_allclose(s1a, s1b, atol=1e-12)
    w = np.full(4, 450.0)
    assert_allclose(actuator_step_k(w, 5 * sample + 450, 0.1, 150.0, 800.0),
                    actuator_step_k.py_func(w, 5 * sample + 450, 0.1, 150.0, 800.0), atol=1e-12)


def test_rk4_kernel_matches_python():
    prm = VehicleParams()
    plant = Plant(prm)
    x = VehicleState.hover(prm).rigid_body()
    x[10:13] = (1.0, -0.5, 0.2)
    args = (np.full(4, 470.0), np.full(4, 20.0), np.array([2.0, 0.0, 0.0]),
            plant.p, plant.rx, plant.ry, plant.spin, 1 / 512)
    assert_allclose(rk4_k(x, *args), rk4_k.py_func(x, *args), rtol=1e-13, atol=1e-15)


@pytest.mark.skipif(not USE_NUMBA, reason="compiled path disabled in this environment")
def test_flag_disables_compilation():
    env = dict(os.environ, CASCADE_INDI_NUMBA="0")
    code = ("import cascade_indi, cascade_indi.mathutil as m; "
            "print(cascade_indi.USE_NUMBA, m.quat_mul_k.py_func is m.quat_mul_k)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]


@pytest.mark.slow
def test_scenario_identical_with_and_without_numba(tmp_path):
    code = ("import sys; from cascade_indi.config import load_config; "
            "from cascade_indi.sim.scenario import run_scenario; "
            "run_scenario(load_config('windtunnel-indi').replace(scenario={'duration': 0.5})).to_csv(sys.argv[1])")
    paths = []
    for flag in ("0", "1"):
        path = tmp_path / f"trace{flag}.csv"
        subprocess.run([sys.executable, "-c", code, str(path)], check=True,
                       env=dict(os.environ, CASCADE_INDI_NUMBA=flag))
        paths.append(path)
    from cascade_indi.trace import Trace
    a, b = (Trace.from_csv(p) for p in paths)
    assert a.columns == b.columns
    assert_allclose(a.data, b.data, rtol=1e-9, atol=1e-9)
