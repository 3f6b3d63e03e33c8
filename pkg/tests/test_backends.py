import importlib.util
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from stabpath import _backend, _kernels_py, gw_model as gw, qde_solver as q

compiled = pytest.mark.skipif(not _backend.COMPILED, reason="compiled kernels not built")


def sample_points(rng):
    """Points in every evaluation regime, including the cut and the origin."""
    radii = np.concatenate([rng.uniform(0.01, 2, 40), rng.uniform(2, 18, 40),
                            rng.uniform(18, 300, 40)])
    angles = rng.uniform(-np.pi, np.pi, radii.size)
    z = radii * np.exp(1j * angles)
    return np.concatenate([z, [0j, 1.0, -3.0 + 0j, 25j, -40.0 + 0j]])


@compiled
@pytest.mark.parametrize("scaled", [False, True])
def test_bessel_backends_agree(rng, scaled):
    from stabpath import _kernels

    z = sample_points(rng)
    fast = _kernels.bessel01(z, scaled)
    slow = _kernels_py.bessel01(z, scaled)
    np.testing.assert_array_equal(fast[6], slow[6])          # same regime choice
    for a, b in zip(fast[:6], slow[:6]):
        finite = np.isfinite(b)
        np.testing.assert_array_equal(np.isfinite(a), finite)
        scale = np.maximum(np.abs(b[finite]), 1e-300)
        assert np.max(np.abs(a[finite] - b[finite]) / scale) < 1e-12


@compiled
def test_integrator_backends_agree():
    from stabpath import _kernels

    m, params = gw.builtin_p1(0.1), gw.p1_params(0.3 + 0.7j)
    coeffs = np.array([-q.truncated_endomorphism(m, params, 1.0) / params.z,
                       np.diag([-0.5, 0.5]).astype(complex)])
    powers = np.array([0.0, -1.0])
    y0 = np.eye(2, dtype=complex)
    t = q.geometric_grid(1, 40, 30)
    fast = _kernels.integrate_linear(coeffs, powers, y0, t, 1e-10, 2.0)
    slow = _kernels_py.integrate_linear(coeffs, powers, y0, t, 1e-10, 2.0)
    assert fast[3] == slow[3] == 0
    assert fast[2] == slow[2]                                   # identical step sequence
    np.testing.assert_allclose(fast[1], slow[1], rtol=1e-13)
    np.testing.assert_allclose(fast[0], slow[0], rtol=1e-11, atol=1e-13)


def test_backend_flag_is_consistent():
    assert _backend.BACKEND == ("compiled" if _backend.COMPILED else "python")
    if not _backend.COMPILED:
        assert _backend.kernels is _kernels_py


def test_environment_variable_forces_python(tmp_path):
    code = "from stabpath import _backend; print(_backend.BACKEND)"
    env = dict(os.environ, STABPATH_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env,
                         check=True)
    assert out.stdout.strip() == "python"
    env.pop("STABPATH_PURE_PYTHON")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env,
                         check=True)
    built = importlib.util.find_spec("stabpath._kernels") is not None
    assert out.stdout.strip() == ("compiled" if built else "python")


def test_pure_python_pipeline_matches(tmp_path):
    """The whole P^1 decomposition is backend independent."""
    code = ("import math, json\n"
            "from stabpath import qde_solver as q\n"
            "from stabpath.cli_reporting import run_p1_pipeline\n"
            "_, sod, _, _ = run_p1_pipeline(0.5j * math.pi, 0, q.geometric_grid(1, 60, 400))\n"
            "print(json.dumps([[a.real, a.imag] for a in sod.alphas]))\n")
    runs = []
    for flag in ("1", "0"):
        env = dict(os.environ, STABPATH_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                             env=env, check=True)
        runs.append(np.array(json.loads(out.stdout)))
    np.testing.assert_allclose(runs[0], runs[1], atol=1e-10)
