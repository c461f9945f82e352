import os
import subprocess
import sys

import numpy as np
import pytest

from jordan_cone import kernels
from jordan_cone import _kernels_py

compiled = pytest.importorskip("jordan_cone._kernels")


def random_symmetric(rng, batch, n, dtype=np.float64):
    a = rng.standard_normal((batch, n, n))
    return (0.5 * (a + np.swapaxes(a, -1, -2))).astype(dtype)


def check_eigh(a, w, v, tol):
    n = a.shape[-1]
    assert np.all(np.diff(w, axis=-1) >= 0)
    vtv = np.swapaxes(v, -1, -2) @ v
    assert np.max(np.abs(vtv - np.eye(n))) <= tol
    recon = v @ (w[..., :, None] * np.swapaxes(v, -1, -2))
    assert np.max(np.abs(recon - a)) <= tol * max(1.0, float(np.max(np.abs(a))))


def test_backend_selected():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
def test_compiled_matches_numpy(n):
    rng = np.random.default_rng(n)
    a = random_symmetric(rng, 200, n)
    w, v = compiled.sym_eigh(a)
    check_eigh(a, w, v, 1e-13)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_longdouble_backends_agree(n):
    rng = np.random.default_rng(10 + n)
    a = random_symmetric(rng, 100, n, np.longdouble)
    w1, v1 = compiled.sym_eigh(a)
    w2, v2 = _kernels_py.sym_eigh(a)
    assert w1.dtype == w2.dtype == np.longdouble
    eps = float(np.finfo(np.longdouble).eps)
    check_eigh(a, w1, v1, 100 * eps)
    check_eigh(a, w2, v2, 100 * eps)
    assert np.max(np.abs(w1 - w2)) <= 100 * eps * float(np.max(np.abs(a)))


def test_fallback_float64_matches_numpy():
    rng = np.random.default_rng(3)
    a = random_symmetric(rng, 50, 4)
    w, v = _kernels_py.sym_eigh(a)
    check_eigh(a, w, v, 1e-13)


def test_repeated_eigenvalues():
    a = np.diag([2.0, 2.0, 5.0])[None]
    for mod in (compiled, _kernels_py):
        w, v = mod.sym_eigh(a)
        assert np.allclose(w, [[2, 2, 5]])
        check_eigh(a, w, v, 1e-14)


def test_single_matrix_and_determinism():
    a = random_symmetric(np.random.default_rng(0), 1, 4)[0]
    w1, v1 = compiled.sym_eigh(a)
    w2, v2 = compiled.sym_eigh(a.copy())
    assert w1.shape == (4,) and np.array_equal(w1, w2) and np.array_equal(v1, v2)


def test_env_var_forces_python_backend():
    env = dict(os.environ, JORDAN_CONE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from jordan_cone import kernels; print(kernels.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
