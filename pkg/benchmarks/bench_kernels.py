"""Timings for the three hot kernels: numba JIT against the plain fallbacks.

Run from the repository root:

    python benchmarks/bench_kernels.py

Imports both implementations directly, so it does not matter whether
QLOAN_DISABLE_NUMBA is set; if numba is unavailable the JIT column is skipped.
"""

import time

import numpy as np

from qloan._kernels import (
    debt_backward_py,
    debt_forward_py,
    givens_compose_py,
    region_deltas_loop,
    region_deltas_py,
)

try:
    from numba import njit
except ImportError:
    njit = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench(name, py_fn, jit_fn, args, inner=1):
    def run_many(fn):
        def wrapped(*a):
            for _ in range(inner):
                fn(*a)
        return wrapped

    py_time = timeit(run_many(py_fn), *args) / inner
    if jit_fn is not None:
        jit_fn(*args)  # compile outside the timed region
        jit_time = timeit(run_many(jit_fn), *args) / inner
        speedup = f"{py_time / jit_time:6.1f}x"
        jit_col = f"{jit_time * 1e3:10.3f}"
    else:
        jit_col, speedup = "      n/a", "   n/a"
    print(f"{name:<28} {py_time * 1e3:10.3f} {jit_col} {speedup}")


def main():
    rng = np.random.default_rng(0)

    m = 360
    rates = np.full(m, 0.01)
    q = np.full(m, 1.2)

    dim = 100
    planes = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    plane_i = np.array([p[0] for p in planes], dtype=np.int64)
    plane_j = np.array([p[1] for p in planes], dtype=np.int64)
    angles = rng.uniform(-np.pi, np.pi, len(planes))

    q3 = np.array([56.0, 51.45, 46.305])
    xs = np.linspace(-1, 1, 200)
    ys = np.linspace(-1, 1, 200)

    compiled = {}
    if njit is not None:
        compiled = {
            "debt_forward": njit(cache=True)(debt_forward_py),
            "debt_backward": njit(cache=True)(debt_backward_py),
            "givens_compose": njit(cache=True)(givens_compose_py),
            "region_deltas": njit(cache=True)(region_deltas_loop),
        }

    print(f"{'kernel':<28} {'fallback ms':>10} {'numba ms':>10} {'speedup':>7}")
    bench("debt_forward (M=360)", debt_forward_py,
          compiled.get("debt_forward"), (100.0, rates, q), inner=200)
    bench("debt_backward (M=360)", debt_backward_py,
          compiled.get("debt_backward"), (rates, q), inner=200)
    bench("givens_compose (M=100)", givens_compose_py,
          compiled.get("givens_compose"), (dim, plane_i, plane_j, angles), inner=5)
    bench("region_deltas (200x200)", region_deltas_py,
          compiled.get("region_deltas"), (q3, 0.6, xs, ys), inner=5)


if __name__ == "__main__":
    main()
