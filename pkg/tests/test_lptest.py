"""Tests for the vertex-pair equality tests and the chi-square machinery.

Ground truths used here: scipy's central and noncentral chi-square
distributions as CDF/quantile oracles, the frozen 0.95 quantile with two
degrees of freedom (5.991464547107979), exact zero statistics for identical
rows, invariance of the quadratic form under a common rotation of all rows,
and the power curve's monotonicity in the noncentrality parameter.
"""

import numpy as np
import pytest
import scipy.stats

from eigenrows import (
    Chi2Params,
    ConfigError,
    DomainError,
    Embedding,
    SbmSpec,
    SingularError,
    ase_embed,
    chi2_cdf,
    chi2_quantile,
    one_step_refine,
    sample_rdpg,
    t_ase,
    t_ose,
    theoretical_g,
    theoretical_power,
    theoretical_sigma_rdpg,
    two_block_truth,
)


def _embeddings(n=120, seed=29):
    lat = two_block_truth(SbmSpec(n=n, rho=0.5, a=0.9, b=0.05)).lat
    obs = sample_rdpg(lat, seed=seed)
    scaled = ase_embed(obs, 2, 0)
    return scaled, one_step_refine(obs, scaled)


class TestChi2Params:
    def test_invalid_degrees_of_freedom(self):
        for df in (0, -1, 1.5):
            with pytest.raises(DomainError):
                Chi2Params(df=df)

    def test_negative_noncentrality(self):
        with pytest.raises(DomainError):
            Chi2Params(df=2, noncentrality=-0.1)


class TestChi2Cdf:
    def test_central_matches_scipy(self):
        xs = np.array([0.05, 0.5, 1.0, 3.0, 8.0, 25.0, 240.0])
        for df in (1, 2, 5, 200):
            got = [chi2_cdf(x, Chi2Params(df=df)) for x in xs]
            np.testing.assert_allclose(got, scipy.stats.chi2.cdf(xs, df), atol=1e-10)

    def test_noncentral_matches_scipy(self):
        xs = np.array([0.5, 2.0, 6.0, 15.0, 60.0, 180.0])
        for df, ncp in ((2, 0.5), (2, 5.0), (4, 20.0), (2, 100.0)):
            got = [chi2_cdf(x, Chi2Params(df=df, noncentrality=ncp)) for x in xs]
            np.testing.assert_allclose(got, scipy.stats.ncx2.cdf(xs, df, ncp),
                                       atol=1e-10)

    def test_zero_noncentrality_is_central(self):
        for x in (0.5, 3.0, 9.0):
            assert chi2_cdf(x, Chi2Params(df=3, noncentrality=0.0)) == chi2_cdf(
                x, Chi2Params(df=3))

    def test_nonpositive_argument_gives_zero(self):
        assert chi2_cdf(0.0, Chi2Params(df=2)) == 0.0
        assert chi2_cdf(-4.0, Chi2Params(df=2, noncentrality=3.0)) == 0.0


class TestChi2Quantile:
    def test_frozen_reference_value(self):
        np.testing.assert_allclose(chi2_quantile(0.95, 2), 5.991464547107979,
                                   atol=1e-9)

    def test_matches_scipy_ppf(self):
        for prob in (0.05, 0.5, 0.9, 0.99):
            for df, ncp in ((1, 0.0), (2, 0.0), (7, 3.0), (200, 0.0)):
                got = chi2_quantile(prob, df, ncp)
                want = (scipy.stats.chi2.ppf(prob, df) if ncp == 0.0
                        else scipy.stats.ncx2.ppf(prob, df, ncp))
                np.testing.assert_allclose(got, want, atol=1e-7)

    def test_roundtrip_through_cdf(self):
        for prob in (0.1, 0.5, 0.95):
            for df, ncp in ((2, 0.0), (3, 4.0)):
                q = chi2_quantile(prob, df, ncp)
                assert abs(chi2_cdf(q, Chi2Params(df=df, noncentrality=ncp))
                           - prob) <= 1e-8

    def test_monotone_in_probability_and_noncentrality(self):
        qs = [chi2_quantile(p, 2) for p in (0.1, 0.5, 0.9, 0.99)]
        assert qs == sorted(qs)
        assert chi2_quantile(0.9, 2, 5.0) > chi2_quantile(0.9, 2, 0.0)

    def test_zero_probability_is_lower_endpoint(self):
        assert chi2_quantile(0.0, 2) == 0.0

    def test_invalid_probability_raises(self):
        for prob in (1.0, -0.1, 1.5):
            with pytest.raises(DomainError):
                chi2_quantile(prob, 2)


class TestPairStatistics:
    def test_identical_rows_give_zero_statistic(self):
        scaled, refined = _embeddings()
        scaled.coords[11] = scaled.coords[3]
        res = t_ase(scaled, 3, 11)
        assert res.statistic == 0.0
        assert res.p_value == 1.0
        assert not res.reject
        refined.coords[11] = refined.coords[3]
        assert t_ose(refined, scaled, 3, 11).statistic == 0.0

    def test_statistic_symmetric_in_pair(self):
        scaled, refined = _embeddings()
        assert t_ase(scaled, 5, 80).statistic == t_ase(scaled, 80, 5).statistic
        assert (t_ose(refined, scaled, 5, 80).statistic
                == t_ose(refined, scaled, 80, 5).statistic)

    def test_invariant_under_common_rotation(self):
        scaled, refined = _embeddings()
        q, _ = np.linalg.qr(np.random.default_rng(31).standard_normal((2, 2)))
        rot_scaled = Embedding(coords=scaled.coords @ q, kind="scaled",
                               split=scaled.split)
        rot_refined = Embedding(coords=refined.coords @ q, kind="refined",
                                split=refined.split)
        base = t_ase(scaled, 5, 80).statistic
        assert abs(t_ase(rot_scaled, 5, 80).statistic - base) <= 1e-8 * base
        base = t_ose(refined, scaled, 5, 80).statistic
        got = t_ose(rot_refined, rot_scaled, 5, 80).statistic
        assert abs(got - base) <= 1e-8 * base

    def test_decision_matches_critical_value_and_p_value(self):
        scaled, refined = _embeddings()
        for i, j in ((0, 1), (5, 80), (10, 110), (60, 61)):
            for res in (t_ase(scaled, i, j), t_ose(refined, scaled, i, j)):
                assert res.reject == (res.statistic > res.critical_value)
                assert res.reject == (res.p_value < res.alpha)
                assert res.df == 2

    def test_level_one_rejects_positive_statistic(self):
        scaled, _ = _embeddings()
        res = t_ase(scaled, 5, 80, alpha=1.0)
        assert res.critical_value == 0.0
        assert res.reject

    def test_invalid_pairs_raise(self):
        scaled, refined = _embeddings()
        with pytest.raises(ConfigError):
            t_ase(scaled, 4, 4)
        with pytest.raises(ConfigError):
            t_ase(scaled, 0, 120)
        with pytest.raises(ConfigError):
            t_ose(scaled, refined, 0, 1)

    def test_constant_rows_are_singular(self):
        emb = Embedding(coords=np.tile([0.5, 0.2], (20, 1)), kind="scaled",
                        split=(2, 0))
        with pytest.raises(SingularError):
            t_ase(emb, 0, 1)


class TestTheoreticalPower:
    def test_zero_separation_gives_size(self):
        for alpha in (0.01, 0.05, 0.2):
            power = theoretical_power(np.zeros(2), np.eye(2), 2, alpha)
            np.testing.assert_allclose(power, alpha, atol=1e-8)

    def test_monotone_in_separation(self):
        powers = [theoretical_power(np.array([s, 0.0]), np.eye(2), 2, 0.05)
                  for s in (0.2, 0.5, 1.0, 2.0, 4.0)]
        assert powers == sorted(powers)
        assert powers[-1] > powers[0]

    def test_information_bound_orders_power(self):
        lat = two_block_truth(SbmSpec(n=200, rho=0.5, a=0.9, b=0.05)).lat
        i, j = 0, 199
        cov_ase = theoretical_sigma_rdpg(lat, i).sigma + theoretical_sigma_rdpg(lat, j).sigma
        cov_ose = theoretical_g(lat, i).sigma + theoretical_g(lat, j).sigma
        mu = np.array([0.4, 0.3])
        assert (theoretical_power(mu, cov_ose, 2, 0.05)
                >= theoretical_power(mu, cov_ase, 2, 0.05))

    def test_large_noncentrality_saturates(self):
        power = theoretical_power(np.array([10.0, 0.0]), np.eye(2), 2, 0.05)
        assert power >= 0.999

    def test_singular_covariance_raises(self):
        with pytest.raises(SingularError):
            theoretical_power(np.ones(2), np.ones((2, 2)), 2, 0.05)
