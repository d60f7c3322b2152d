"""Dense symmetric spectral primitives.

Signed truncated eigendecompositions, orthogonal alignment (matrix sign and
Procrustes), and the norms used throughout the package.  Everything here is a
pure function of its inputs.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, RankError, SpectrumError

# Relative threshold under which a selected eigenvalue counts as numerically
# zero (and hence as having the wrong sign for either side of the split).
ZERO_EIG_RTOL = 1e-10

# Relative smallest-singular-value threshold below which matrix_sign refuses
# to align (the subspaces are nearly orthogonal and alignment is meaningless).
SIGN_RANK_RTOL = 1e-12


def as_symmetric(m, name="m"):
    """Validate that m is square and symmetric; return it exactly symmetrized.

    Entries are compared up to a small relative tolerance (BLAS products such
    as X @ X.T need not be bit-symmetric); the returned copy satisfies
    out[i, j] == out[j, i] exactly.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-8 * max(scale, 1.0)):
        raise DimensionError(f"{name} is not symmetric")
    return 0.5 * (m + m.T)


@dataclass(eq=False)
class SignedEigenPair:
    """Top positive and negative eigenpairs of a symmetric matrix.

    s_plus is descending and positive.  s_minus is descending and negative,
    so the most negative eigenvalue sits last.  Eigenvector signs follow the
    package convention: the largest-|coordinate| entry of each column is
    positive, ties resolved to the lowest index.
    """

    n_pos: int
    n_neg: int
    u_plus: np.ndarray
    u_minus: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray

    @property
    def d(self):
        return self.n_pos + self.n_neg


def _fix_signs(u):
    """Flip eigenvector columns so the largest-|coordinate| entry is positive."""
    u = np.array(u, dtype=np.float64, copy=True)
    for k in range(u.shape[1]):
        col = u[:, k]
        idx = int(np.argmax(np.abs(col)))
        if col[idx] < 0:
            u[:, k] = -col
    return u


def signed_truncated_eig(m, n_pos, n_neg):
    """Return the n_pos algebraically largest and n_neg smallest eigenpairs.

    Computed by a full dense symmetric eigendecomposition followed by
    selection (for a one-sided split only the requested eigenvectors are
    back-transformed, which is noticeably faster and numerically identical).

    Args:
        m: symmetric matrix.
        n_pos: number of positive eigenvalues to retain.
        n_neg: number of negative eigenvalues to retain.

    Raises:
        DimensionError: if n_pos + n_neg > n or the counts are negative.
        SpectrumError: if a selected "positive" eigenvalue is <= 0 or a
            "negative" one is >= 0, up to a relative zero tolerance of
            ZERO_EIG_RTOL times the largest selected magnitude.
    """
    m = as_symmetric(m)
    n = m.shape[0]
    if n_pos < 0 or n_neg < 0:
        raise DimensionError("eigenvalue counts must be nonnegative")
    if n_pos + n_neg > n:
        raise DimensionError(
            f"requested {n_pos}+{n_neg} eigenpairs from a {n}x{n} matrix"
        )
    if n_pos and n_neg:
        vals, vecs = scipy.linalg.eigh(m)
        top_vals = vals[n - n_pos:][::-1]
        top_vecs = vecs[:, n - n_pos:][:, ::-1]
        bot_vals = vals[:n_neg][::-1]
        bot_vecs = vecs[:, :n_neg][:, ::-1]
    elif n_pos:
        vals, vecs = scipy.linalg.eigh(m, subset_by_index=[n - n_pos, n - 1])
        top_vals = vals[::-1]
        top_vecs = vecs[:, ::-1]
        bot_vals = np.empty(0)
        bot_vecs = np.empty((n, 0))
    elif n_neg:
        vals, vecs = scipy.linalg.eigh(m, subset_by_index=[0, n_neg - 1])
        top_vals = np.empty(0)
        top_vecs = np.empty((n, 0))
        bot_vals = vals[::-1]
        bot_vecs = vecs[:, ::-1]
    else:
        top_vals = bot_vals = np.empty(0)
        top_vecs = bot_vecs = np.empty((n, 0))

    selected = np.concatenate([top_vals, bot_vals])
    tol = ZERO_EIG_RTOL * (np.max(np.abs(selected)) if selected.size else 0.0)
    if n_pos and top_vals[-1] <= tol:
        raise SpectrumError(
            f"requested positive eigenvalue {top_vals[-1]:.6g} is not positive; "
            "the rank split (n_pos, n_neg) looks misspecified"
        )
    if n_neg and bot_vals[0] >= -tol:
        raise SpectrumError(
            f"requested negative eigenvalue {bot_vals[0]:.6g} is not negative; "
            "the rank split (n_pos, n_neg) looks misspecified"
        )
    return SignedEigenPair(
        n_pos=n_pos,
        n_neg=n_neg,
        u_plus=_fix_signs(np.ascontiguousarray(top_vecs)),
        u_minus=_fix_signs(np.ascontiguousarray(bot_vecs)),
        s_plus=np.ascontiguousarray(top_vals),
        s_minus=np.ascontiguousarray(bot_vals),
    )


def infer_rank_split(m, d):
    """Infer (n_pos, n_neg) from the signs of the d largest-|.| eigenvalues."""
    m = as_symmetric(m)
    vals = np.linalg.eigvalsh(m)
    order = np.argsort(-np.abs(vals), kind="stable")
    picked = vals[order[:d]]
    tol = ZERO_EIG_RTOL * np.max(np.abs(picked)) if d else 0.0
    if d and np.any(np.abs(picked) <= tol):
        raise SpectrumError(
            "rank split is undetermined: a zero eigenvalue sits among the "
            f"{d} largest magnitudes"
        )
    n_pos = int(np.sum(picked > 0))
    return n_pos, d - n_pos


@dataclass(eq=False)
class OrthogonalAligner:
    """A d x d orthogonal alignment matrix and its Frobenius misfit."""

    w: np.ndarray
    residual: float


def matrix_sign(c, rel_tol=SIGN_RANK_RTOL):
    """Orthogonal polar factor W1 @ W2.T from the SVD of c.

    This is the orthogonal Procrustes solution maximizing trace(W.T @ c).

    Raises:
        RankError: when c is numerically singular (smallest singular value
            at most rel_tol times the largest).
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DimensionError(f"matrix sign needs a square matrix, got {c.shape}")
    u, s, vt = np.linalg.svd(c)
    if s[0] == 0.0 or s[-1] <= rel_tol * s[0]:
        raise RankError(
            f"alignment matrix is numerically singular (smallest singular "
            f"value {s[-1]:.3e}, largest {s[0]:.3e})"
        )
    return OrthogonalAligner(w=u @ vt, residual=0.0)


def procrustes_align(source, target):
    """Orthogonal W minimizing ||source @ W - target||_F.

    W = matrix_sign(source.T @ target); the residual of the returned aligner
    is the achieved Frobenius misfit.  For a single column this reduces to
    the sign of the inner product.
    """
    source = np.asarray(source, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if source.shape != target.shape:
        raise DimensionError(
            f"source and target shapes differ: {source.shape} vs {target.shape}"
        )
    aligner = matrix_sign(source.T @ target)
    residual = float(np.linalg.norm(source @ aligner.w - target))
    return OrthogonalAligner(w=aligner.w, residual=residual)


def two_to_infinity_norm(m):
    """Maximum Euclidean norm over the rows of m."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError("two-to-infinity norm is defined for matrices")
    if m.shape[0] == 0:
        return 0.0
    return float(np.sqrt(np.max(np.sum(m * m, axis=1))))


def delta_matrix(x):
    """Second-moment matrix (1/n) X.T @ X, exactly symmetrized."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError("delta_matrix expects an n x d matrix")
    g = x.T @ x / x.shape[0]
    return 0.5 * (g + g.T)
