"""Equality tests for latent positions and the chi-square machinery behind them.

Two statistics compare a vertex pair: one built from the scaled embedding and
plug-in covariances, one from the refined embedding and plug-in information
matrices.  Both are asymptotically central chi-square with d degrees of
freedom under the null, and noncentral under local alternatives, which also
gives the theoretical power curve.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammainc, gammaln

from .errors import ConfigError, DomainError, SingularError
from .embedding import EPS_CLIP_DEFAULT, plugin_g, plugin_sigma

_TAIL_MASS = 1e-12
_SING_RTOL = 1e-12


@dataclass(frozen=True)
class Chi2Params:
    """Degrees of freedom and noncentrality of a chi-square law."""

    df: int
    noncentrality: float = 0.0

    def __post_init__(self):
        if int(self.df) != self.df or self.df < 1:
            raise DomainError(f"degrees of freedom must be a positive integer, got {self.df}")
        if self.noncentrality < 0.0:
            raise DomainError(f"noncentrality must be nonnegative, got {self.noncentrality}")


def chi2_cdf(x, params):
    """CDF of the (non)central chi-square law at x.

    The central case is the regularized lower incomplete gamma function; the
    noncentral case sums Poisson-weighted central terms, truncated once the
    accumulated Poisson mass reaches 1 - 1e-12.
    """
    if x <= 0.0:
        return 0.0
    df = float(params.df)
    lam = float(params.noncentrality)
    if lam == 0.0:
        return float(gammainc(0.5 * df, 0.5 * x))
    half = 0.5 * lam
    m_max = int(half + 12.0 * np.sqrt(half) + 200.0)
    m = np.arange(m_max + 1)
    logw = -half + m * np.log(half) - gammaln(m + 1.0)
    w = np.exp(logw)
    cum = np.cumsum(w)
    cut = int(np.searchsorted(cum, 1.0 - _TAIL_MASS)) + 1
    m = m[:cut]
    w = w[:cut]
    terms = gammainc(0.5 * df + m, 0.5 * x)
    return float(np.dot(w, terms))


def chi2_quantile(prob, df, noncentrality=0.0):
    """Inverse chi-square CDF by bracketed root finding.

    prob = 0 returns 0.0 exactly (the distribution's lower endpoint), so a
    level-1 test has critical value 0 and always rejects positive statistics.

    Raises:
        DomainError: if prob is outside [0, 1).
    """
    if prob == 0.0:
        return 0.0
    if not 0.0 < prob < 1.0:
        raise DomainError(f"probability must lie in [0, 1), got {prob}")
    params = Chi2Params(df=df, noncentrality=noncentrality)
    hi = df + 10.0 * np.sqrt(2.0 * df) + 2.0 * noncentrality + 50.0
    while chi2_cdf(hi, params) < prob:
        hi *= 2.0
    return float(brentq(lambda q: chi2_cdf(q, params) - prob, 0.0, hi, xtol=1e-10))


@dataclass(eq=False)
class TestResult:
    """Outcome of one equality test on a vertex pair."""

    statistic: float
    df: int
    alpha: float
    critical_value: float
    reject: bool
    p_value: float
    kind: str


def _solve_spd(c, rhs, what):
    c = np.asarray(c, dtype=np.float64)
    vals = np.linalg.eigvalsh(0.5 * (c + c.T))
    if vals[-1] <= 0.0 or vals[0] <= _SING_RTOL * vals[-1]:
        raise SingularError(f"{what} is numerically singular (eigenvalues {vals})")
    return np.linalg.solve(c, rhs)


def _decide(statistic, df, alpha, kind):
    critical = chi2_quantile(1.0 - alpha, df)
    p_value = 1.0 - chi2_cdf(statistic, Chi2Params(df=df))
    return TestResult(
        statistic=float(statistic),
        df=int(df),
        alpha=float(alpha),
        critical_value=float(critical),
        reject=bool(statistic > critical),
        p_value=float(p_value),
        kind=kind,
    )


def _check_pair(n, i, j):
    i, j = int(i), int(j)
    if i == j:
        raise ConfigError("the test compares two distinct vertices")
    if not (0 <= i < n and 0 <= j < n):
        raise ConfigError(f"pair ({i}, {j}) out of range for n={n}")
    return i, j


def t_ase(emb, i, j, alpha=0.05, eps_clip=EPS_CLIP_DEFAULT):
    """Equality test from the scaled embedding and plug-in covariances.

    T = n (y_i - y_j)^T [Sigma_i + Sigma_j]^{-1} (y_i - y_j) with y the
    scaled embedding rows; rejects when T exceeds the (1 - alpha) central
    chi-square quantile with d degrees of freedom.

    Raises:
        ConfigError: if i equals j, is out of range, or emb is not scaled.
        SingularError: if the summed plug-in covariance is singular.
    """
    if emb.kind != "scaled":
        raise ConfigError(f"t_ase expects a scaled embedding, got {emb.kind!r}")
    i, j = _check_pair(emb.n, i, j)
    csum = (plugin_sigma(emb, i, eps_clip=eps_clip).sigma
            + plugin_sigma(emb, j, eps_clip=eps_clip).sigma)
    diff = emb.coords[i] - emb.coords[j]
    statistic = emb.n * float(diff @ _solve_spd(csum, diff, "the summed covariance"))
    return _decide(statistic, emb.d, alpha, "ASE")


def t_ose(emb_refined, emb_scaled, i, j, alpha=0.05, eps_clip=EPS_CLIP_DEFAULT):
    """Equality test from the refined embedding and plug-in information.

    T = n (z_i - z_j)^T [G_i^{-1} + G_j^{-1}]^{-1} (z_i - z_j) with z the
    refined rows and G the plug-in information evaluated at the scaled rows.

    Raises:
        ConfigError: if the embeddings have the wrong kinds or the pair is
            invalid.
        SingularError: if an information matrix or the summed inverse is
            singular.
    """
    if emb_refined.kind != "refined":
        raise ConfigError(f"t_ose expects a refined embedding, got {emb_refined.kind!r}")
    if emb_scaled.kind != "scaled":
        raise ConfigError(
            f"t_ose expects the scaled embedding second, got {emb_scaled.kind!r}"
        )
    i, j = _check_pair(emb_refined.n, i, j)
    csum = (plugin_g(emb_scaled, i, eps_clip=eps_clip).sigma
            + plugin_g(emb_scaled, j, eps_clip=eps_clip).sigma)
    diff = emb_refined.coords[i] - emb_refined.coords[j]
    statistic = emb_refined.n * float(diff @ _solve_spd(csum, diff, "the summed inverse information"))
    return _decide(statistic, emb_refined.d, alpha, "OSE")


def theoretical_power(mu, cov_sum, df, alpha):
    """Asymptotic power of the level-alpha test at mean separation mu.

    power = 1 - F(q; df, mu^T cov_sum^{-1} mu) where q is the central
    (1 - alpha) quantile and F the noncentral chi-square CDF; monotone
    increasing in the noncentrality.

    Raises:
        SingularError: if cov_sum is singular.
    """
    mu = np.asarray(mu, dtype=np.float64)
    ncp = float(mu @ _solve_spd(cov_sum, mu, "the covariance sum"))
    critical = chi2_quantile(1.0 - alpha, df)
    return 1.0 - chi2_cdf(critical, Chi2Params(df=df, noncentrality=max(ncp, 0.0)))
