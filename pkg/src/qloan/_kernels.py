"""Hot numeric loops.

The three kernels here dominate runtime: the per-period debt recurrence, the
Givens composition that turns an angle vector into an orthogonal matrix (up to
M(M-1)/2 plane rotations), and the M=3 sign-pattern grid scan. Each is
JIT-compiled with numba unless the environment variable ``QLOAN_DISABLE_NUMBA``
is set to a truthy value, in which case the plain NumPy fallbacks are used.
``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

import numpy as np


def _numba_requested() -> bool:
    flag = os.environ.get("QLOAN_DISABLE_NUMBA", "").strip().lower()
    return flag not in {"1", "true", "yes", "on"}


def debt_forward_py(d0: float, rates: np.ndarray, installments: np.ndarray) -> np.ndarray:
    """Iterate d_n = (1 + r_n) d_{n-1} - q_n from d_0. Returns d of length M+1."""
    m = installments.shape[0]
    d = np.empty(m + 1)
    d[0] = d0
    for n in range(1, m + 1):
        d[n] = (1.0 + rates[n - 1]) * d[n - 1] - installments[n - 1]
    return d


def debt_backward_py(rates: np.ndarray, installments: np.ndarray) -> np.ndarray:
    """Iterate the same recurrence anchored at the terminal boundary d_M = 0.

    Forward iteration amplifies any rounding of the installment by
    (1+t)^M, which is astronomical for long high-rate loans; the backward
    direction is a contraction and stays accurate for every grid point the
    test suite uses.
    """
    m = installments.shape[0]
    d = np.empty(m + 1)
    d[m] = 0.0
    for n in range(m, 0, -1):
        d[n - 1] = (d[n] + installments[n - 1]) / (1.0 + rates[n - 1])
    return d


def givens_compose_py(dim: int, plane_i: np.ndarray, plane_j: np.ndarray,
                      angles: np.ndarray) -> np.ndarray:
    """Left-multiply plane rotations G(i,j,angle) onto the identity.

    Plane k is applied as U <- G_k @ U, so the first listed plane acts first
    on a vector. Each G has cos on (i,i) and (j,j), +sin on (i,j), -sin on
    (j,i). Only rows i and j change, so the whole composition is O(g*M).
    """
    u = np.eye(dim)
    for k in range(angles.shape[0]):
        i = plane_i[k]
        j = plane_j[k]
        c = np.cos(angles[k])
        s = np.sin(angles[k])
        ri = c * u[i] + s * u[j]
        rj = c * u[j] - s * u[i]
        u[i] = ri
        u[j] = rj
    return u


def region_deltas_loop(q: np.ndarray, z: float, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Rotated-minus-original installments over an (x, y) grid at fixed z.

    Coordinates are sines of the three rotation angles (x = sin phi in the
    (1,2) plane, y = sin theta in (2,3), z = sin gamma in (1,3)); angles are
    restricted to [-pi/2, pi/2] so cosines are nonnegative. Returns an array
    of shape (len(ys), len(xs), 3) with entry [iy, ix, i] = qbar_i - q_i.
    """
    ny = ys.shape[0]
    nx = xs.shape[0]
    out = np.empty((ny, nx, 3))
    sg = z
    cg = np.sqrt(1.0 - z * z)
    for iy in range(ny):
        st = ys[iy]
        ct = np.sqrt(1.0 - st * st)
        for ix in range(nx):
            sp = xs[ix]
            cp = np.sqrt(1.0 - sp * sp)
            # U = G23(theta) @ G13(gamma) @ G12(phi), rows written out
            u00 = cg * cp
            u01 = cg * sp
            u02 = sg
            u10 = -ct * sp - st * sg * cp
            u11 = ct * cp - st * sg * sp
            u12 = st * cg
            u20 = st * sp - ct * sg * cp
            u21 = -st * cp - ct * sg * sp
            u22 = ct * cg
            out[iy, ix, 0] = u00 * u00 * q[0] + u01 * u01 * q[1] + u02 * u02 * q[2] - q[0]
            out[iy, ix, 1] = u10 * u10 * q[0] + u11 * u11 * q[1] + u12 * u12 * q[2] - q[1]
            out[iy, ix, 2] = u20 * u20 * q[0] + u21 * u21 * q[1] + u22 * u22 * q[2] - q[2]
    return out


def region_deltas_py(q: np.ndarray, z: float, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized fallback for :func:`region_deltas_loop` (same grid, same math)."""
    sp = xs[None, :]
    cp = np.sqrt(1.0 - xs * xs)[None, :]
    st = ys[:, None]
    ct = np.sqrt(1.0 - ys * ys)[:, None]
    sg = z
    cg = np.sqrt(1.0 - z * z)
    rows = np.empty((ys.shape[0], xs.shape[0], 3, 3))
    rows[..., 0, 0] = cg * cp
    rows[..., 0, 1] = cg * sp
    rows[..., 0, 2] = sg
    rows[..., 1, 0] = -ct * sp - st * sg * cp
    rows[..., 1, 1] = ct * cp - st * sg * sp
    rows[..., 1, 2] = st * cg
    rows[..., 2, 0] = st * sp - ct * sg * cp
    rows[..., 2, 1] = -st * cp - ct * sg * sp
    rows[..., 2, 2] = ct * cg
    return (rows * rows) @ q - q


USING_NUMBA = False

if _numba_requested():
    try:
        from numba import njit
    except ImportError:
        njit = None
    if njit is not None:
        debt_forward = njit(cache=True)(debt_forward_py)
        debt_backward = njit(cache=True)(debt_backward_py)
        givens_compose = njit(cache=True)(givens_compose_py)
        region_deltas = njit(cache=True)(region_deltas_loop)
        USING_NUMBA = True

if not USING_NUMBA:
    debt_forward = debt_forward_py
    debt_backward = debt_backward_py
    givens_compose = givens_compose_py
    region_deltas = region_deltas_py
