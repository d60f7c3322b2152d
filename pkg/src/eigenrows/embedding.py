"""Spectral embeddings, the one-step refinement, and covariance estimates.

The scaled embedding stacks U|S|^{1/2} for the positive and negative parts of
the spectrum; the unscaled embedding keeps the bare eigenvectors.  The
refinement applies one Fisher-scoring step of the Bernoulli likelihood to
every row.  Covariance constructors come in truth-based (theoretical) and
embedding-based (plugin) flavors and share the CovarianceEstimate container.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import COND_LIMIT_DEFAULT, refine_rows
from .errors import ConfigError, DomainError, SingularError, SingularFisherError
from .spectral import SignedEigenPair, delta_matrix, signed_truncated_eig

EPS_CLIP_DEFAULT = 1e-3
_SING_RTOL = 1e-12


@dataclass(eq=False)
class Embedding:
    """Row-per-vertex spectral coordinates.

    Attributes:
        coords: (n, d) matrix of embedded rows.
        kind: "scaled", "unscaled", or "refined".
        split: (n_pos, n_neg) rank split the columns came from.
        source_eig: decomposition the coordinates were built from, if any.
    """

    coords: np.ndarray
    kind: str
    split: tuple
    source_eig: SignedEigenPair | None = None

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def d(self):
        return self.coords.shape[1]


@dataclass(eq=False)
class CovarianceEstimate:
    """A per-vertex covariance matrix plus optional companions.

    Attributes:
        sigma: d x d covariance (or inverse information) matrix.
        vertex: vertex index the estimate belongs to.
        source: "theoretical" or "plugin".
        gamma: optional spectrally normalized variant.
        g_info: optional information matrix whose inverse sigma is.
        spd: whether sigma is symmetric positive definite numerically.
    """

    sigma: np.ndarray
    vertex: int
    source: str
    gamma: np.ndarray | None = None
    g_info: np.ndarray | None = None
    spd: bool = True


def _is_spd(m):
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(m).max()))):
        return False
    try:
        vals = np.linalg.eigvalsh(0.5 * (m + m.T))
    except np.linalg.LinAlgError:
        return False
    return bool(vals[0] > 0.0)


def _eig_for(obs, n_pos, n_neg, eig):
    if eig is not None:
        return eig
    return signed_truncated_eig(obs.a, n_pos, n_neg)


def ase_embed(obs, n_pos, n_neg, eig=None):
    """Scaled spectral embedding: rows of U|S|^{1/2}, positive columns first.

    Pass a precomputed decomposition via eig to share it between the scaled
    and unscaled embeddings of the same observation.
    """
    pair = _eig_for(obs, n_pos, n_neg, eig)
    blocks = []
    if pair.n_pos:
        blocks.append(pair.u_plus * np.sqrt(pair.s_plus))
    if pair.n_neg:
        blocks.append(pair.u_minus * np.sqrt(np.abs(pair.s_minus)))
    coords = np.ascontiguousarray(np.hstack(blocks))
    return Embedding(coords=coords, kind="scaled", split=(pair.n_pos, pair.n_neg),
                     source_eig=pair)


def unscaled_embed(obs, n_pos, n_neg, eig=None):
    """Unscaled spectral embedding: the bare eigenvector rows."""
    pair = _eig_for(obs, n_pos, n_neg, eig)
    blocks = []
    if pair.n_pos:
        blocks.append(pair.u_plus)
    if pair.n_neg:
        blocks.append(pair.u_minus)
    coords = np.ascontiguousarray(np.hstack(blocks))
    return Embedding(coords=coords, kind="unscaled", split=(pair.n_pos, pair.n_neg),
                     source_eig=pair)


def score_and_fisher(lat, a, i, eps_clip=EPS_CLIP_DEFAULT, max_clamp_frac=0.05):
    """Score vector and Fisher information of vertex i's Bernoulli likelihood.

    Inner products x_i.x_j are clamped to [eps_clip, 1 - eps_clip] before any
    denominator use; the residual A_ij - rho x_i.x_j keeps the raw product so
    the score vanishes exactly at a noiseless observation.

    Raises:
        DomainError: if more than max_clamp_frac of the inner products
            needed clamping, which signals inputs far outside the model.
    """
    x = lat.x
    rho = lat.rho
    raw = x @ x[i]
    m = np.clip(raw, eps_clip, 1.0 - eps_clip)
    clamp_frac = float(np.mean(m != raw))
    if clamp_frac > max_clamp_frac:
        raise DomainError(
            f"{clamp_frac:.1%} of inner products at vertex {i} needed clamping "
            f"(limit {max_clamp_frac:.1%})"
        )
    den = m * (1.0 - rho * m)
    score = ((a[i] - rho * raw) / den) @ x
    fisher = rho * (x.T * (1.0 / den)) @ x
    return score, 0.5 * (fisher + fisher.T)


def one_step_refine(obs, emb, eps_clip=EPS_CLIP_DEFAULT, cond_limit=COND_LIMIT_DEFAULT):
    """One Fisher-scoring step of every embedded row against the observation.

    The update treats the scaled embedding rows as both the evaluation point
    and the surrounding positions, with inner products clamped to
    [eps_clip, 1 - eps_clip].

    Raises:
        ConfigError: if emb.kind is not "scaled".
        SingularFisherError: if some vertex's information matrix has
            condition number above cond_limit.
    """
    if emb.kind != "scaled":
        raise ConfigError(f"refinement starts from a scaled embedding, got {emb.kind!r}")
    refined, conds = refine_rows(emb.coords, obs.a, eps_clip, cond_limit)
    bad = ~np.isfinite(conds) | (conds > cond_limit)
    if bad.any():
        first = int(np.argmax(bad))
        raise SingularFisherError(
            f"information matrix at vertex {first} has condition number "
            f"{conds[first]:.3g} (limit {cond_limit:.3g})"
        )
    return Embedding(coords=refined, kind="refined", split=emb.split,
                     source_eig=emb.source_eig)


def _inv_and_invsqrt(delta, what):
    """Inverse and inverse square root of an SPD matrix via eigendecomposition."""
    vals, vecs = np.linalg.eigh(0.5 * (delta + delta.T))
    if vals[0] <= _SING_RTOL * max(vals[-1], 0.0) or vals[-1] <= 0.0:
        raise SingularError(f"{what} is numerically singular (eigenvalues {vals})")
    inv = (vecs / vals) @ vecs.T
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.T
    return 0.5 * (inv + inv.T), 0.5 * (inv_sqrt + inv_sqrt.T)


def _sandwich_sigma(x, weights, vertex, source):
    n = x.shape[0]
    delta = delta_matrix(x)
    inv, inv_sqrt = _inv_and_invsqrt(delta, "the second-moment matrix")
    mid = (x.T * weights) @ x / n
    mid = 0.5 * (mid + mid.T)
    sigma = inv @ mid @ inv
    sigma = 0.5 * (sigma + sigma.T)
    gamma = inv_sqrt @ sigma @ inv_sqrt
    gamma = 0.5 * (gamma + gamma.T)
    return CovarianceEstimate(sigma=sigma, vertex=int(vertex), source=source,
                              gamma=gamma, spd=_is_spd(sigma))


def theoretical_sigma_rdpg(lat, i):
    """Limit covariance of vertex i's scaled embedding row under the graph model.

    sigma = Delta^{-1} [ (1/n) sum_j x_i.x_j (1 - rho x_i.x_j) x_j x_j^T ] Delta^{-1},
    gamma = Delta^{-1/2} sigma Delta^{-1/2}.

    Raises:
        SingularError: if the second-moment matrix Delta is singular.
    """
    g = lat.x @ lat.x[i]
    weights = g * (1.0 - lat.rho * g)
    return _sandwich_sigma(lat.x, weights, i, "theoretical")


def theoretical_sigma_snmc(lat, tau, i):
    """Limit covariance of vertex i's scaled row under masked noisy completion.

    sigma = Delta^{-1} [ (1/n) sum_j ((1-rho)(x_i.x_j)^2 + tau^2 rho^3) x_j x_j^T ] Delta^{-1}.
    """
    g = lat.x @ lat.x[i]
    rho = lat.rho
    weights = (1.0 - rho) * g * g + (tau * tau) * rho**3
    return _sandwich_sigma(lat.x, weights, i, "theoretical")


def theoretical_g(lat, i):
    """Information-style matrix G and its inverse for vertex i.

    G = (1/n) sum_j x_j x_j^T / (x_i.x_j (1 - rho x_i.x_j)); the estimate's
    sigma field holds G^{-1} and g_info holds G itself.

    Raises:
        DomainError: if some denominator x_i.x_j (1 - rho x_i.x_j) is not
            strictly positive (the separation condition fails).
        SingularError: if G is numerically singular.
    """
    g = lat.x @ lat.x[i]
    den = g * (1.0 - lat.rho * g)
    if den.min() <= 0.0:
        j = int(np.argmin(den))
        raise DomainError(
            f"inner product with vertex {j} gives nonpositive denominator "
            f"{den[j]:.6g}; the positions are not separated from {{0, 1}}"
        )
    n = lat.n
    info = (lat.x.T * (1.0 / den)) @ lat.x / n
    info = 0.5 * (info + info.T)
    inv, _ = _inv_and_invsqrt(info, "the information matrix")
    return CovarianceEstimate(sigma=inv, vertex=int(i), source="theoretical",
                              g_info=info, spd=_is_spd(inv))


def _require_scaled(emb, what):
    if emb.kind != "scaled":
        raise ConfigError(f"{what} expects a scaled embedding, got {emb.kind!r}")


def plugin_sigma(emb, i, eps_clip=EPS_CLIP_DEFAULT, symmetric_plugin=True):
    """Plug-in covariance for vertex i built from the scaled embedding alone.

    With symmetric_plugin (the default) both outer factors are the inverse of
    the sample second-moment matrix, mirroring the theoretical shape.  With
    symmetric_plugin=False the trailing factor is the second-moment matrix
    itself, a variant kept for comparison; its output is generally asymmetric
    and is flagged spd=False.

    Raises:
        ConfigError: if emb.kind is not "scaled".
        SingularError: if the sample second-moment matrix is singular.
    """
    _require_scaled(emb, "plugin_sigma")
    x = emb.coords
    n = x.shape[0]
    m = np.clip(x @ x[i], eps_clip, 1.0 - eps_clip)
    delta = delta_matrix(x)
    inv, _ = _inv_and_invsqrt(delta, "the sample second-moment matrix")
    mid = (x.T * (m * (1.0 - m))) @ x / n
    mid = 0.5 * (mid + mid.T)
    if symmetric_plugin:
        sigma = inv @ mid @ inv
        sigma = 0.5 * (sigma + sigma.T)
    else:
        sigma = inv @ mid @ delta
    return CovarianceEstimate(sigma=sigma, vertex=int(i), source="plugin",
                              spd=_is_spd(sigma))


def plugin_g(emb, i, eps_clip=EPS_CLIP_DEFAULT):
    """Plug-in information matrix for vertex i from the scaled embedding.

    G = (1/n) sum_j y_j y_j^T / (m_j (1 - m_j)) with y the embedding rows and
    m_j the clamped inner products; sigma holds G^{-1}, g_info holds G.
    """
    _require_scaled(emb, "plugin_g")
    x = emb.coords
    n = x.shape[0]
    m = np.clip(x @ x[i], eps_clip, 1.0 - eps_clip)
    info = (x.T * (1.0 / (m * (1.0 - m)))) @ x / n
    info = 0.5 * (info + info.T)
    inv, _ = _inv_and_invsqrt(info, "the plug-in information matrix")
    return CovarianceEstimate(sigma=inv, vertex=int(i), source="plugin",
                              g_info=info, spd=_is_spd(inv))
