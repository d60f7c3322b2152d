"""Timing comparison of the row-refinement kernels.

Runs the vectorized numpy kernel and, when numba is importable, the compiled
twin on the same synthetic refinement problems and prints a timing table.
The numba kernel is warmed up once per shape so JIT compilation does not
pollute the measurements.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 500,1000,2000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from eigenrows._kernels import COND_LIMIT_DEFAULT, np_refine_rows

try:
    from eigenrows._kernels import nb_refine_rows
except ImportError:
    nb_refine_rows = None


def _problem(n, d=2, seed=0):
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.25, np.pi / 2 - 0.25, size=n)
    radii = np.sqrt(rng.uniform(0.35, 0.8, size=n))
    x = radii[:, None] * np.column_stack([np.cos(angles), np.sin(angles)])
    rho = 0.3
    p = rho * (x @ x.T)
    upper = rng.random((n, n)) < p
    a = np.triu(upper, 1)
    a = (a + a.T).astype(np.float64)
    coords = np.sqrt(rho) * x[:, :d] + 0.01 * rng.standard_normal((n, d))
    return np.ascontiguousarray(coords), a


def _time(fn, coords, a, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(coords, a, 1e-3, COND_LIMIT_DEFAULT)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="500,1000,2000",
                        help="comma-separated vertex counts")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per kernel (best is reported)")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s]

    print(f"{'n':>6}  {'numpy (s)':>10}  {'numba (s)':>10}  {'speedup':>8}")
    for n in sizes:
        coords, a = _problem(n)
        t_np = _time(np_refine_rows, coords, a, args.repeats)
        if nb_refine_rows is None:
            print(f"{n:>6}  {t_np:>10.4f}  {'n/a':>10}  {'n/a':>8}")
            continue
        nb_refine_rows(coords, a, 1e-3, COND_LIMIT_DEFAULT)
        t_nb = _time(nb_refine_rows, coords, a, args.repeats)
        print(f"{n:>6}  {t_np:>10.4f}  {t_nb:>10.4f}  {t_np / t_nb:>8.2f}")


if __name__ == "__main__":
    main()
