"""Truth-based error decompositions for simulated observations.

Splits the aligned embedding error into an explicit linear term driven by the
noise matrix and a higher-order remainder, for both the scaled and unscaled
embeddings.  Everything here needs the simulation truth; estimation modules
never do.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigError, TruthMissingError
from .spectral import (
    matrix_sign,
    procrustes_align,
    signed_truncated_eig,
    two_to_infinity_norm,
)


@dataclass(eq=False)
class DecompositionRecord:
    """Per-vertex split of the aligned embedding error.

    total_error = linear_term + remainder holds exactly by construction;
    remainder_two_inf is the max remainder row norm of the whole
    decomposition, repeated on every record for flat CSV emission.
    """

    vertex: int
    linear_term: np.ndarray
    total_error: np.ndarray
    remainder: np.ndarray
    remainder_two_inf: float
    kind: str


def _require_truth(obs):
    if obs.truth is None or obs.truth.latent is None:
        raise TruthMissingError("decompositions need an observation with simulation truth")
    return obs.truth


def _records(total, linear, kind):
    remainder = total - linear
    sup = two_to_infinity_norm(remainder)
    return [
        DecompositionRecord(
            vertex=i,
            linear_term=linear[i].copy(),
            total_error=total[i].copy(),
            remainder=remainder[i].copy(),
            remainder_two_inf=sup,
            kind=kind,
        )
        for i in range(total.shape[0])
    ]


def decompose_scaled(obs, emb):
    """Decompose the aligned scaled-embedding error against the truth.

    With W the orthogonal alignment of the embedding onto rho^{1/2} X, the
    total error X~ W - rho^{1/2} X splits into the linear term
    rho^{-1/2} (A - P) X (X^T X)^{-1} plus a remainder; the max remainder row
    norm is recorded alongside.

    Raises:
        TruthMissingError: if the observation has no simulation truth.
        ConfigError: if the embedding is not scaled or has negative-part
            columns (the latent-position truth has a PSD mean).
    """
    truth = _require_truth(obs)
    if emb.kind != "scaled":
        raise ConfigError(f"scaled decomposition needs a scaled embedding, got {emb.kind!r}")
    if emb.split[1] != 0:
        raise ConfigError("scaled decomposition supports positive-part embeddings only")
    lat = truth.latent
    target = np.sqrt(lat.rho) * lat.x
    w = procrustes_align(emb.coords, target).w
    total = emb.coords @ w - target
    e = obs.a - truth.p
    xtx = lat.x.T @ lat.x
    linear = np.linalg.solve(xtx, (e @ lat.x).T).T / np.sqrt(lat.rho)
    return _records(total, linear, "scaled")


def decompose_unscaled(obs, emb):
    """Decompose the aligned unscaled-embedding error against the truth.

    The population eigenvectors U_P and eigenvalues S_P come from the exact
    mean matrix; the alignment is the matrix sign of U_P^T U_A per sign
    split, and the linear term is (A - P) U_P S_P^{-1} W*.

    Raises:
        TruthMissingError: if the observation has no simulation truth.
        ConfigError: if the embedding is not unscaled.
    """
    truth = _require_truth(obs)
    if emb.kind != "unscaled":
        raise ConfigError(
            f"unscaled decomposition needs an unscaled embedding, got {emb.kind!r}"
        )
    n_pos, n_neg = emb.split
    pair = signed_truncated_eig(truth.p, n_pos, n_neg)
    u_blocks, s_blocks, w_blocks = [], [], []
    col = 0
    for u_p, s_p, width in ((pair.u_plus, pair.s_plus, n_pos),
                            (pair.u_minus, pair.s_minus, n_neg)):
        if not width:
            continue
        u_a = emb.coords[:, col:col + width]
        w_blocks.append(matrix_sign(u_p.T @ u_a).w)
        u_blocks.append(u_p)
        s_blocks.append(s_p)
        col += width
    u_pop = np.hstack(u_blocks)
    s_pop = np.concatenate(s_blocks)
    w_star = scipy.linalg.block_diag(*w_blocks)
    total = emb.coords - u_pop @ w_star
    e = obs.a - truth.p
    linear = (e @ (u_pop / s_pop)) @ w_star
    return _records(total, linear, "unscaled")


def _five_number(values):
    q = np.quantile(np.asarray(values, dtype=np.float64), [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"min": float(q[0]), "q1": float(q[1]), "median": float(q[2]),
            "q3": float(q[3]), "max": float(q[4])}


def remainder_profile(records, n=None):
    """Five-number summaries of remainder row norms and sup-norm statistics.

    Returns a dict with "row_norms" summarizing the per-record remainder
    row norms and "sup_scaled" summarizing sqrt(n) times the recorded max
    row norms.  n defaults to the record count, which matches a single
    full-graph decomposition.
    """
    if not records:
        return {"row_norms": _five_number([0.0]), "sup_scaled": _five_number([0.0])}
    if n is None:
        n = len(records)
    row_norms = [float(np.linalg.norm(r.remainder)) for r in records]
    sups = [np.sqrt(n) * r.remainder_two_inf for r in records]
    return {"row_norms": _five_number(row_norms), "sup_scaled": _five_number(sups)}
