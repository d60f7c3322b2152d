"""Samplers and ground-truth constructors for the model families.

Random dot product graphs, mixed membership block models, symmetric noisy
matrix completion, and the two closed-form block models used by the Monte
Carlo experiments.  All samplers are pure functions of (spec, seed) and use a
counter-based generator, so replicate r of an experiment can simply use
seed = base_seed + r.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, ProbabilityError

_BOUND_SLACK = 1e-12


def rng_from_seed(seed):
    """Counter-based generator (Philox) for reproducible, splittable streams."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(eq=False)
class LatentPositions:
    """Latent position matrix with one row per vertex.

    Attributes:
        x: (n, d) rows x_i.
        rho: global sparsity factor in (0, 1].
        delta: optional lower bound required of both x_i.x_j and 1 - x_i.x_j.
    """

    x: np.ndarray
    rho: float
    delta: float | None = None

    def __post_init__(self):
        self.x = np.ascontiguousarray(self.x, dtype=np.float64)
        if self.x.ndim != 2:
            raise DomainError("latent positions must form an n x d matrix")
        if not 0.0 < self.rho <= 1.0:
            raise ConfigError(f"sparsity factor must be in (0, 1], got {self.rho}")
        gram = self.x @ self.x.T
        gmin = float(gram.min())
        gmax = float(gram.max())
        if gmin < -_BOUND_SLACK or gmax > 1.0 + _BOUND_SLACK:
            raise DomainError(
                f"latent inner products must lie in [0, 1], got [{gmin:.6g}, {gmax:.6g}]"
            )
        if self.delta is not None:
            if gmin < self.delta - _BOUND_SLACK or gmax > 1.0 - self.delta + _BOUND_SLACK:
                raise DomainError(
                    f"latent inner products must lie in [{self.delta}, {1.0 - self.delta}], "
                    f"got [{gmin:.6g}, {gmax:.6g}]"
                )

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]


@dataclass(eq=False)
class SbmSpec:
    """Block model spec: two-block (a, b) or the rank-one variant (p_val, q_val).

    Exactly one of the pairs must be supplied.  Block sizes default to an
    even split.
    """

    n: int
    rho: float
    a: float | None = None
    b: float | None = None
    p_val: float | None = None
    q_val: float | None = None
    block_sizes: tuple | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("block models need at least two vertices")
        if not 0.0 < self.rho <= 1.0:
            raise ConfigError(f"sparsity factor must be in (0, 1], got {self.rho}")
        two_block = self.a is not None or self.b is not None
        rank_one = self.p_val is not None or self.q_val is not None
        if two_block == rank_one:
            raise ConfigError("supply exactly one of (a, b) or (p_val, q_val)")
        probs = (self.a, self.b) if two_block else (self.p_val, self.q_val)
        if any(p is None for p in probs):
            raise ConfigError("both probabilities of the chosen pair are required")
        if any(not 0.0 < p < 1.0 for p in probs):
            raise ConfigError(f"block probabilities must be in (0, 1), got {probs}")
        if self.block_sizes is None:
            self.block_sizes = (self.n // 2, self.n - self.n // 2)
        self.block_sizes = tuple(int(s) for s in self.block_sizes)
        if len(self.block_sizes) != 2 or sum(self.block_sizes) != self.n:
            raise ConfigError(f"block sizes {self.block_sizes} do not sum to n={self.n}")


@dataclass(eq=False)
class MmsbmSpec:
    """Mixed membership spec: row-stochastic theta and a pure-node factor.

    The block probability matrix is B = x_star @ x_star.T; the factor is
    supplied directly, arbitrary B matrices are not factored here.
    """

    theta: np.ndarray
    x_star: np.ndarray
    rho: float

    def __post_init__(self):
        self.theta = np.ascontiguousarray(self.theta, dtype=np.float64)
        self.x_star = np.ascontiguousarray(self.x_star, dtype=np.float64)
        if not 0.0 < self.rho <= 1.0:
            raise ConfigError(f"sparsity factor must be in (0, 1], got {self.rho}")
        if self.theta.ndim != 2 or self.x_star.ndim != 2:
            raise ConfigError("theta and x_star must be matrices")
        d = self.theta.shape[1]
        if self.x_star.shape != (d, d):
            raise ConfigError(
                f"x_star must be {d}x{d} to match theta, got {self.x_star.shape}"
            )
        if self.theta.min() < 0.0:
            raise ConfigError("membership profiles must be nonnegative")
        row_sums = self.theta.sum(axis=1)
        if np.max(np.abs(row_sums - 1.0)) > 1e-12:
            raise ConfigError("each membership profile row must sum to 1")
        bmat = self.x_star @ self.x_star.T
        if bmat.min() <= 0.0 or bmat.max() >= 1.0:
            raise ConfigError("block probability entries must lie strictly in (0, 1)")

    @property
    def b(self):
        return self.x_star @ self.x_star.T


@dataclass(eq=False)
class SnmcSpec:
    """Noisy matrix completion spec: latent positions, mask rate, noise level.

    The Gaussian noise s.d. is tied to the mask rate: sigma = tau * rho^2.
    """

    x: LatentPositions
    sigma: float
    tau: float

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ConfigError("noise s.d. must be nonnegative")
        if abs(self.sigma - self.tau * self.rho**2) > 1e-12:
            raise ConfigError(
                f"sigma must equal tau * rho^2; got sigma={self.sigma}, "
                f"tau*rho^2={self.tau * self.rho ** 2}"
            )

    @property
    def rho(self):
        return self.x.rho

    @classmethod
    def from_tau(cls, x, tau):
        """Build a spec with sigma derived from tau and the latent rho."""
        return cls(x=x, sigma=tau * x.rho**2, tau=tau)


@dataclass(eq=False)
class Truth:
    """Ground truth attached to a simulated observation."""

    p: np.ndarray
    latent: LatentPositions | None = None


@dataclass(eq=False)
class SymObservation:
    """Observed symmetric matrix plus optional simulation ground truth."""

    a: np.ndarray
    truth: Truth | None = None
    seed: int | None = None


def _mirror_upper(m):
    """Copy the upper triangle (including the diagonal) onto the lower."""
    upper = np.triu(m)
    return upper + np.triu(m, 1).T


def sample_rdpg(lat, seed, hollow=False):
    """Sample a random dot product graph with edge probabilities rho * x_i.x_j.

    Upper-triangle entries (including the diagonal, i.e. self loops) are
    independent Bernoulli draws, mirrored to the lower triangle.  With
    hollow=True the diagonal is zeroed instead.

    Raises:
        ProbabilityError: if any rho * x_i.x_j falls outside [0, 1].
    """
    p0 = lat.rho * (lat.x @ lat.x.T)
    p0 = 0.5 * (p0 + p0.T)
    if p0.min() < -_BOUND_SLACK or p0.max() > 1.0 + _BOUND_SLACK:
        raise ProbabilityError(
            f"edge probabilities must lie in [0, 1], got "
            f"[{p0.min():.6g}, {p0.max():.6g}]"
        )
    np.clip(p0, 0.0, 1.0, out=p0)
    gen = rng_from_seed(seed)
    u = gen.random((lat.n, lat.n))
    a = _mirror_upper((u < p0).astype(np.float64))
    if hollow:
        np.fill_diagonal(a, 0.0)
        p0 = p0.copy()
        np.fill_diagonal(p0, 0.0)
    return SymObservation(a=a, truth=Truth(p=p0, latent=lat), seed=int(seed))


def sample_snmc(spec, seed, hollow=False):
    """Sample symmetric noisy matrix completion.

    Entries are (rho * x_i.x_j + eps_ij) * I_ij / rho with I ~ Bernoulli(rho)
    and eps ~ N(0, sigma^2), jointly independent on the upper triangle and
    mirrored.  Entries are exactly zero wherever the mask is zero, and the
    truth record stores the generating mean rho * X @ X.T.
    """
    lat = spec.x
    rho = spec.rho
    gram = lat.x @ lat.x.T
    gram = 0.5 * (gram + gram.T)
    p0 = rho * gram
    if p0.min() < -_BOUND_SLACK or p0.max() > 1.0 + _BOUND_SLACK:
        raise ProbabilityError(
            f"pre-mask means must lie in [0, 1], got [{p0.min():.6g}, {p0.max():.6g}]"
        )
    gen = rng_from_seed(seed)
    u = gen.random((lat.n, lat.n))
    noise = gen.standard_normal((lat.n, lat.n))
    # (rho g + eps) / rho is evaluated as g + eps * (sigma/rho) so that the
    # sigma = 0 case reproduces the inner products bit-exactly.
    vals = (gram + noise * (spec.sigma / rho)) * (u < rho)
    a = _mirror_upper(vals)
    if hollow:
        np.fill_diagonal(a, 0.0)
        p0 = p0.copy()
        np.fill_diagonal(p0, 0.0)
    return SymObservation(a=a, truth=Truth(p=p0, latent=lat), seed=int(seed))


def sample_mmsbm(spec, seed, hollow=False):
    """Sample a mixed membership block model.

    Equivalent to sample_rdpg with latent positions theta @ x_star and the
    same seed (bit-identical output).
    """
    lat = LatentPositions(x=spec.theta @ spec.x_star, rho=spec.rho)
    return sample_rdpg(lat, seed, hollow=hollow)


@dataclass(eq=False)
class TwoBlockTruth:
    """Closed-form spectral truth for the equal-size two-block model."""

    lat: LatentPositions
    p: np.ndarray
    lam: np.ndarray
    u: np.ndarray
    v: np.ndarray
    var_scaled: float
    var_unscaled: float


def two_block_truth(spec):
    """Closed-form eigenpairs and limit variances for the two-block model.

    The mean matrix has within-block entries rho*a and cross-block entries
    rho*b.  Its nonzero eigenvalues are n*rho*(a+b)/2 and n*rho*(a-b)/2, with
    constant and block-sign eigenvectors; v_k = sqrt(lam_k) * u_k are the
    scaled eigenvectors.  var_scaled = (a+b)/(a-b) is the limit variance of
    sqrt(n) times a scaled eigenvector coordinate error, and
    var_unscaled = 2(a+b)/(a-b)^2 the one for n*sqrt(rho) times an unscaled
    coordinate error.
    """
    if spec.a is None or spec.b is None:
        raise ConfigError("two-block truth needs the (a, b) probability pair")
    if spec.n % 2 != 0 or spec.block_sizes[0] != spec.block_sizes[1]:
        raise ConfigError("two-block truth requires an even n with equal blocks")
    a, b, n, rho = spec.a, spec.b, spec.n, spec.rho
    if a < b:
        raise ConfigError("two-block truth requires a >= b")
    half = n // 2
    alpha = math.sqrt((a + b) / 2.0)
    beta = math.sqrt((a - b) / 2.0)
    x = np.empty((n, 2))
    x[:, 0] = alpha
    x[:half, 1] = beta
    x[half:, 1] = -beta
    lat = LatentPositions(x=x, rho=rho)
    p = np.full((n, n), rho * b)
    p[:half, :half] = rho * a
    p[half:, half:] = rho * a
    lam = np.array([n * rho * (a + b) / 2.0, n * rho * (a - b) / 2.0])
    u = np.empty((n, 2))
    u[:, 0] = 1.0 / math.sqrt(n)
    u[:half, 1] = 1.0 / math.sqrt(n)
    u[half:, 1] = -1.0 / math.sqrt(n)
    v = u * np.sqrt(lam)
    var_scaled = math.inf if a == b else (a + b) / (a - b)
    var_unscaled = math.inf if a == b else 2.0 * (a + b) / (a - b) ** 2
    return TwoBlockTruth(
        lat=lat, p=p, lam=lam, u=u, v=v,
        var_scaled=var_scaled, var_unscaled=var_unscaled,
    )


@dataclass(eq=False)
class Rank1Truth:
    """Closed-form spectral truth for the rank-one block model."""

    lat: LatentPositions
    p: np.ndarray
    lam: float
    u_p: np.ndarray


def rank1_sbm_truth(spec):
    """Closed-form eigenpair for the rank-one block model.

    Latent positions are scalar: p_val on the first half, q_val on the
    second.  The single nonzero eigenvalue of the mean matrix is
    n * rho * (p_val^2 + q_val^2) / 2 and u_p is the normalized latent
    vector.
    """
    if spec.p_val is None or spec.q_val is None:
        raise ConfigError("rank-one truth needs the (p_val, q_val) pair")
    if spec.n % 2 != 0 or spec.block_sizes[0] != spec.block_sizes[1]:
        raise ConfigError("rank-one truth requires an even n with equal blocks")
    pv, qv, n, rho = spec.p_val, spec.q_val, spec.n, spec.rho
    half = n // 2
    x = np.empty((n, 1))
    x[:half, 0] = pv
    x[half:, 0] = qv
    lat = LatentPositions(x=x, rho=rho)
    p = np.full((n, n), rho * pv * qv)
    p[:half, :half] = rho * pv * pv
    p[half:, half:] = rho * qv * qv
    lam = n * rho * (pv * pv + qv * qv) / 2.0
    u_p = (x / np.linalg.norm(x))[:, 0]
    return Rank1Truth(lat=lat, p=p, lam=float(lam), u_p=u_p)
