import os
import subprocess
import sys

import numpy as np
import pytest

from qloan import _kernels


pytestmark = pytest.mark.skipif(
    not _kernels.USING_NUMBA, reason="parity tests compare the JIT path against the fallbacks"
)


def test_debt_forward_parity():
    rng = np.random.default_rng(0)
    rates = rng.uniform(0.0, 0.3, 48)
    q = rng.uniform(1.0, 10.0, 48)
    jit = _kernels.debt_forward(100.0, rates, q)
    py = _kernels.debt_forward_py(100.0, rates, q)
    assert np.array_equal(jit, py)  # same statement order, bitwise identical


def test_debt_backward_parity():
    rng = np.random.default_rng(1)
    rates = rng.uniform(0.0, 0.3, 48)
    q = rng.uniform(1.0, 10.0, 48)
    assert np.array_equal(_kernels.debt_backward(rates, q),
                          _kernels.debt_backward_py(rates, q))


def test_givens_parity_and_orthogonality():
    rng = np.random.default_rng(2)
    dim = 12
    planes = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    pi = np.array([p[0] for p in planes], dtype=np.int64)
    pj = np.array([p[1] for p in planes], dtype=np.int64)
    angles = rng.uniform(-np.pi, np.pi, len(planes))
    jit = _kernels.givens_compose(dim, pi, pj, angles)
    py = _kernels.givens_compose_py(dim, pi, pj, angles)
    assert jit == pytest.approx(py, abs=1e-14)
    assert np.max(np.abs(jit @ jit.T - np.eye(dim))) < 1e-13


def test_region_parity():
    q = np.array([56.0, 51.45, 46.305])
    xs = np.linspace(-1, 1, 41)
    ys = np.linspace(-1, 1, 41)
    loop = _kernels.region_deltas(q, 0.6, xs, ys)
    vec = _kernels.region_deltas_py(q, 0.6, xs, ys)
    assert loop == pytest.approx(vec, abs=1e-12)
    # the sign grids agree except possibly where a delta sits at zero
    sign_gap = (loop > 0) ^ (vec > 0)
    assert np.all(np.abs(loop[sign_gap]) < 1e-12)


def test_env_flag_selects_fallback():
    env = dict(os.environ, QLOAN_DISABLE_NUMBA="1")
    code = (
        "from qloan import _kernels; "
        "assert not _kernels.USING_NUMBA; "
        "assert _kernels.debt_forward is _kernels.debt_forward_py; "
        "assert _kernels.region_deltas is _kernels.region_deltas_py; "
        "print('fallback ok')"
    )
    result = subprocess.run([sys.executable, "-c", code], env=env,
                            capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert "fallback ok" in result.stdout
