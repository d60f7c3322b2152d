"""Mixed-membership machinery: vertex hunting, profile estimation, alignment.

The successive projection algorithm picks the simplex-corner rows of the
unscaled eigenvector matrix; the membership profiles follow by inverting the
selected rows.  Evaluation helpers match estimated communities to true ones
and pull out the estimated pure-node positions.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateError,
    DimensionError,
    DomainError,
    NotFoundError,
    SingularError,
    SizeError,
)

_ORTHO_ATOL = 1e-8
_SPA_STOP = 1e-12
_SING_RTOL = 1e-12


@dataclass(eq=False)
class MembershipEstimate:
    """Estimated membership profiles plus the selection bookkeeping."""

    theta_hat: np.ndarray
    spa_indices: tuple
    iota: list | None = None
    eta: float | None = None
    permutation: tuple | None = None

    @property
    def n(self):
        return self.theta_hat.shape[0]

    @property
    def d(self):
        return self.theta_hat.shape[1]


def spa_select(u_a, d, check_orthonormal=True):
    """Successive projection over the row-projection scores of u_a.

    Greedily picks the row index with the largest projected norm, deflates
    the projector by that row's image, and repeats d times.  Ties go to the
    smallest index.  The n x n projector U U^T is never materialized; the
    deflations act on an n x d factor, which is mathematically identical.

    Raises:
        DimensionError: if u_a does not have exactly d columns.
        DomainError: if check_orthonormal is set and the columns are not
            orthonormal within 1e-8.
        DegenerateError: if the projector vanishes before d picks.
    """
    u_a = np.asarray(u_a, dtype=np.float64)
    if u_a.ndim != 2 or u_a.shape[1] != d:
        raise DimensionError(f"expected an n x {d} matrix, got shape {u_a.shape}")
    if check_orthonormal:
        gram = u_a.T @ u_a
        if not np.allclose(gram, np.eye(d), rtol=0.0, atol=_ORTHO_ATOL):
            raise DomainError("columns are not orthonormal within 1e-8")
    b = u_a.copy()
    picked = []
    for _ in range(d):
        gram = b.T @ b
        if np.linalg.norm(gram) <= _SPA_STOP:
            raise DegenerateError(
                f"projector vanished after {len(picked)} of {d} selections"
            )
        scores = np.einsum("ij,jk,ik->i", b, gram, b)
        j_star = int(np.argmax(scores))
        u = b @ b[j_star]
        nrm2 = float(u @ u)
        if nrm2 <= 0.0:
            raise DegenerateError(
                f"projected row norm vanished after {len(picked)} of {d} selections"
            )
        picked.append(j_star)
        b -= np.outer(u, u @ b) / nrm2
    return picked


def estimate_membership(u_a, indices):
    """Membership profiles from the eigenvector rows at the selected indices.

    theta_hat = U_A V^{-1} where V stacks the rows of u_a at the given
    indices; rows of theta_hat at those indices are coordinate vectors by
    construction.

    Raises:
        DimensionError: if the index count differs from the column count.
        SingularError: if V is numerically singular (failed vertex hunting),
            reporting its smallest singular value.
    """
    u_a = np.asarray(u_a, dtype=np.float64)
    indices = [int(i) for i in indices]
    d = u_a.shape[1]
    if len(indices) != d:
        raise DimensionError(f"need exactly {d} selected rows, got {len(indices)}")
    v = u_a[indices]
    svals = np.linalg.svd(v, compute_uv=False)
    if svals[0] == 0.0 or svals[-1] <= _SING_RTOL * svals[0]:
        raise SingularError(
            f"selected rows are numerically singular (smallest singular value "
            f"{svals[-1]:.3g})"
        )
    theta_hat = np.linalg.solve(v.T, u_a.T).T
    return MembershipEstimate(theta_hat=theta_hat, spa_indices=tuple(indices))


def pure_node_indices(est, eta):
    """First vertex within eta of each coordinate vector, or None per community.

    iota_k = min{ i : || theta_hat[i] - e_k || <= eta }.  The result is also
    stored on the estimate together with the threshold.

    Raises:
        DomainError: if eta is not strictly positive.
    """
    if eta <= 0.0:
        raise DomainError(f"threshold must be positive, got {eta}")
    theta = est.theta_hat
    iota = []
    for k in range(theta.shape[1]):
        diff = theta.copy()
        diff[:, k] -= 1.0
        dists = np.linalg.norm(diff, axis=1)
        hits = np.flatnonzero(dists <= eta)
        iota.append(int(hits[0]) if hits.size else None)
    est.iota = iota
    est.eta = float(eta)
    return iota


def align_permutation(theta_hat, theta_true):
    """Column permutation of the truth best matching the estimate.

    Brute force over all d! permutations, minimizing the Frobenius distance
    || theta_hat - theta_true[:, perm] ||; the returned tuple maps estimated
    column k to true column perm[k].  Ties keep the first minimizer.

    Raises:
        DimensionError: if the two matrices have different shapes.
        SizeError: if d exceeds 8 (the search is factorial).
    """
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    theta_true = np.asarray(theta_true, dtype=np.float64)
    if theta_hat.shape != theta_true.shape:
        raise DimensionError(
            f"shape mismatch: {theta_hat.shape} vs {theta_true.shape}"
        )
    d = theta_hat.shape[1]
    if d > 8:
        raise SizeError(f"brute-force alignment supports d <= 8, got {d}")
    best_perm = None
    best_cost = np.inf
    for perm in itertools.permutations(range(d)):
        cost = float(np.linalg.norm(theta_hat - theta_true[:, perm]))
        if cost < best_cost:
            best_cost = cost
            best_perm = perm
    return best_perm


def pure_node_estimates(emb_scaled, emb_refined, iota):
    """Embedded rows at the pure-node indices, per community.

    Returns {k: (scaled row, refined row)} for each community k.

    Raises:
        NotFoundError: if some community has no qualifying pure node.
    """
    missing = [k for k, i in enumerate(iota) if i is None]
    if missing:
        raise NotFoundError(f"no pure node found for communities {missing}")
    return {
        k: (emb_scaled.coords[i].copy(), emb_refined.coords[i].copy())
        for k, i in enumerate(iota)
    }
