"""Hot numerical kernels, with a numba fast path and a pure-numpy fallback.

The active path is picked once at import time: numba is used when it imports
cleanly and the environment variable ``EIGENROWS_NO_NUMBA`` is unset (or
``"0"``).  Both implementations are kept in lockstep; they are compared
against each other in the test suite and timed in
``benchmarks/bench_kernels.py``.
"""

import os

import numpy as np

COND_LIMIT_DEFAULT = 1e12


def _resolve_kernel():
    if os.environ.get("EIGENROWS_NO_NUMBA", "0").strip() not in ("", "0"):
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


ACTIVE_KERNEL = _resolve_kernel()


def np_refine_rows(coords, a, eps, cond_limit=COND_LIMIT_DEFAULT):
    """One Newton/Fisher-scoring step for every row, vectorized in row blocks.

    Args:
        coords: (n, d) scaled embedding, one row per vertex.
        a: (n, n) symmetric observed matrix.
        eps: inner products are clamped to [eps, 1 - eps] before any
            denominator use.
        cond_limit: rows whose Fisher matrix exceeds this condition number
            are left unchanged and flagged through the returned conds.

    Returns:
        (refined, conds): the (n, d) refined rows and the (n,) condition
        numbers of the per-row Fisher matrices.
    """
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    n, d = coords.shape
    refined = np.empty_like(coords)
    conds = np.empty(n)
    eye = np.eye(d)
    block = 256
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        m = coords[lo:hi] @ coords.T
        np.clip(m, eps, 1.0 - eps, out=m)
        w = 1.0 / (m * (1.0 - m))
        score = ((a[lo:hi] - m) * w) @ coords
        fisher = np.einsum("bj,jc,je->bce", w, coords, coords, optimize=True)
        evals = np.linalg.eigvalsh(fisher)
        small = np.abs(evals[:, 0])
        large = np.abs(evals[:, -1])
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.where(small > 0.0, large / small, np.inf)
        conds[lo:hi] = cond
        bad = ~np.isfinite(cond) | (cond > cond_limit)
        if bad.any():
            fisher[bad] = eye
        step = np.linalg.solve(fisher, score[..., None])[..., 0]
        step[bad] = 0.0
        refined[lo:hi] = coords[lo:hi] + step
    return refined, conds


if ACTIVE_KERNEL == "numba":
    import numba

    @numba.njit(cache=True)
    def _nb_refine_rows(coords, a, eps, cond_limit):
        n, d = coords.shape
        refined = np.empty((n, d))
        conds = np.empty(n)
        for i in range(n):
            fisher = np.zeros((d, d))
            score = np.zeros(d)
            for j in range(n):
                m = 0.0
                for c in range(d):
                    m += coords[i, c] * coords[j, c]
                if m < eps:
                    m = eps
                elif m > 1.0 - eps:
                    m = 1.0 - eps
                w = 1.0 / (m * (1.0 - m))
                r = (a[i, j] - m) * w
                for c in range(d):
                    score[c] += r * coords[j, c]
                    wc = w * coords[j, c]
                    for e in range(d):
                        fisher[c, e] += wc * coords[j, e]
            evals = np.linalg.eigvalsh(fisher)
            small = abs(evals[0])
            large = abs(evals[d - 1])
            cond = large / small if small > 0.0 else np.inf
            conds[i] = cond
            if np.isfinite(cond) and cond <= cond_limit:
                step = np.linalg.solve(fisher, score)
                for c in range(d):
                    refined[i, c] = coords[i, c] + step[c]
            else:
                for c in range(d):
                    refined[i, c] = coords[i, c]
        return refined, conds

    def nb_refine_rows(coords, a, eps, cond_limit=COND_LIMIT_DEFAULT):
        """Numba twin of :func:`np_refine_rows`."""
        coords = np.ascontiguousarray(coords, dtype=np.float64)
        a = np.ascontiguousarray(a, dtype=np.float64)
        return _nb_refine_rows(coords, a, float(eps), float(cond_limit))

    refine_rows = nb_refine_rows
else:
    refine_rows = np_refine_rows
