"""Samplers and closed-form model truths.

Ground truths: degenerate probability matrices (all zero / all one), binomial
moment bounds at 3 standard errors, exact algebraic identities for the
noiseless matrix-completion sampler, and hand-computed block eigenpairs.
"""

import math

import numpy as np
import pytest

from eigenrows import (
    ConfigError,
    DomainError,
    LatentPositions,
    MmsbmSpec,
    SbmSpec,
    SnmcSpec,
    rank1_sbm_truth,
    sample_mmsbm,
    sample_rdpg,
    sample_snmc,
    two_block_truth,
)
from eigenrows.models import rng_from_seed


def _two_block_lat(n, a=0.9, b=0.05, rho=0.5):
    return two_block_truth(SbmSpec(n=n, rho=rho, a=a, b=b)).lat


def _mmsbm_spec(n=40, n_pure=10, rho=0.3, b_diag=0.9, b_off=0.1):
    alpha = math.sqrt((b_diag + b_off) / 2.0)
    beta = math.sqrt((b_diag - b_off) / 2.0)
    x_star = np.array([[alpha, beta], [alpha, -beta]])
    theta = np.zeros((n, 2))
    theta[:n_pure, 0] = 1.0
    theta[n_pure:2 * n_pure, 1] = 1.0
    t = np.linspace(0.2, 0.8, n - 2 * n_pure)
    theta[2 * n_pure:, 0] = 1.0 - t
    theta[2 * n_pure:, 1] = t
    return MmsbmSpec(theta=theta, x_star=x_star, rho=rho)


class TestSpecValidation:
    def test_latent_gram_bounds(self):
        with pytest.raises(DomainError):
            LatentPositions(x=np.full((3, 1), 1.2), rho=1.0)

    def test_latent_rho_bounds(self):
        for rho in (0.0, 1.5, -0.1):
            with pytest.raises(ConfigError):
                LatentPositions(x=np.full((3, 1), 0.5), rho=rho)

    def test_latent_delta_band(self):
        x = np.full((3, 1), 0.3)
        LatentPositions(x=x, rho=1.0, delta=0.05)
        with pytest.raises(DomainError):
            LatentPositions(x=x, rho=1.0, delta=0.2)

    def test_sbm_exactly_one_pair(self):
        with pytest.raises(ConfigError):
            SbmSpec(n=10, rho=0.5)
        with pytest.raises(ConfigError):
            SbmSpec(n=10, rho=0.5, a=0.9, b=0.05, p_val=0.95, q_val=0.3)

    def test_sbm_probability_range(self):
        with pytest.raises(ConfigError):
            SbmSpec(n=10, rho=0.5, a=1.0, b=0.05)

    def test_sbm_block_sizes(self):
        spec = SbmSpec(n=11, rho=0.5, a=0.9, b=0.05)
        assert spec.block_sizes == (5, 6)
        with pytest.raises(ConfigError):
            SbmSpec(n=10, rho=0.5, a=0.9, b=0.05, block_sizes=(4, 5))

    def test_mmsbm_row_stochastic(self):
        x_star = np.array([[0.7, 0.6], [0.7, -0.6]])
        theta = np.full((4, 2), 0.6)
        with pytest.raises(ConfigError):
            MmsbmSpec(theta=theta, x_star=x_star, rho=0.5)

    def test_mmsbm_block_probabilities(self):
        theta = np.full((4, 2), 0.5)
        with pytest.raises(ConfigError):
            MmsbmSpec(theta=theta, x_star=np.eye(2), rho=0.5)

    def test_mmsbm_b_property(self):
        spec = _mmsbm_spec()
        np.testing.assert_allclose(
            spec.b, [[0.9, 0.1], [0.1, 0.9]], atol=1e-12
        )

    def test_snmc_sigma_tied_to_tau(self):
        lat = _two_block_lat(8, rho=0.25)
        with pytest.raises(ConfigError):
            SnmcSpec(x=lat, sigma=0.5, tau=1.0)
        spec = SnmcSpec.from_tau(lat, tau=2.0)
        assert spec.sigma == 2.0 * 0.25**2
        assert spec.rho == 0.25


class TestRdpgSampler:
    def test_probability_zero_gives_empty_graph(self):
        lat = LatentPositions(x=np.zeros((6, 1)), rho=1.0)
        obs = sample_rdpg(lat, seed=1)
        assert np.array_equal(obs.a, np.zeros((6, 6)))

    def test_probability_one_gives_complete_graph(self):
        lat = LatentPositions(x=np.ones((6, 1)), rho=1.0)
        obs = sample_rdpg(lat, seed=1)
        assert np.array_equal(obs.a, np.ones((6, 6)))

    def test_symmetric_binary_values(self):
        obs = sample_rdpg(_two_block_lat(30), seed=5)
        assert np.array_equal(obs.a, obs.a.T)
        assert set(np.unique(obs.a)) <= {0.0, 1.0}

    def test_hollow_zeroes_diagonal(self):
        obs = sample_rdpg(_two_block_lat(30), seed=5, hollow=True)
        assert np.all(np.diag(obs.a) == 0.0)
        assert np.all(np.diag(obs.truth.p) == 0.0)

    def test_mean_matches_binomial_moments(self):
        obs = sample_rdpg(_two_block_lat(500), seed=11)
        iu = np.triu_indices(500)
        p = obs.truth.p[iu]
        se = math.sqrt(float(np.sum(p * (1.0 - p))))
        assert abs(float(np.sum(obs.a[iu] - p))) <= 3.0 * se
        assert iu[0].size >= 1e5

    def test_same_seed_is_bit_identical(self):
        lat = _two_block_lat(40)
        first = sample_rdpg(lat, seed=7)
        second = sample_rdpg(lat, seed=7)
        assert np.array_equal(first.a, second.a)
        assert not np.array_equal(first.a, sample_rdpg(lat, seed=8).a)

    def test_rng_streams_are_seed_stable(self):
        a = rng_from_seed(123).random(8)
        b = rng_from_seed(123).random(8)
        assert np.array_equal(a, b)


class TestSnmcSampler:
    def test_full_observation_no_noise_is_exact(self):
        lat = _two_block_lat(12, rho=1.0)
        spec = SnmcSpec.from_tau(lat, tau=0.0)
        obs = sample_snmc(spec, seed=3)
        gram = lat.x @ lat.x.T
        expected = np.triu(gram) + np.triu(gram, 1).T
        assert np.array_equal(obs.a, expected)

    def test_noiseless_entries_equal_inner_products(self):
        lat = _two_block_lat(20, rho=0.5)
        spec = SnmcSpec.from_tau(lat, tau=0.0)
        obs = sample_snmc(spec, seed=9)
        gram = lat.x @ lat.x.T
        gram = np.triu(gram) + np.triu(gram, 1).T
        hit = obs.a != 0.0
        assert hit.any()
        assert np.array_equal(obs.a[hit], gram[hit])

    def test_zero_fraction_matches_mask_rate(self):
        rho = 0.4
        lat = _two_block_lat(400, rho=rho)
        obs = sample_snmc(SnmcSpec.from_tau(lat, tau=1.0), seed=13)
        iu = np.triu_indices(400)
        frac = float(np.mean(obs.a[iu] == 0.0))
        se = math.sqrt(rho * (1.0 - rho) / iu[0].size)
        assert abs(frac - (1.0 - rho)) <= 3.0 * se

    def test_truth_records_generating_mean(self):
        lat = _two_block_lat(10, rho=0.5)
        obs = sample_snmc(SnmcSpec.from_tau(lat, tau=1.0), seed=2)
        np.testing.assert_allclose(obs.truth.p, 0.5 * (lat.x @ lat.x.T), atol=1e-12)


class TestMmsbmSampler:
    def test_edge_probabilities_span_block_range(self):
        spec = _mmsbm_spec(rho=0.3)
        obs = sample_mmsbm(spec, seed=21)
        assert obs.truth.p.min() >= 0.3 * 0.1 - 1e-12
        assert obs.truth.p.max() <= 0.3 * 0.9 + 1e-12

    def test_balanced_mixture_probability(self):
        x_star = _mmsbm_spec().x_star
        theta = np.array([[1.0, 0.0], [0.5, 0.5]])
        spec = MmsbmSpec(theta=theta, x_star=x_star, rho=0.3)
        obs = sample_mmsbm(spec, seed=4)
        assert abs(obs.truth.p[0, 1] - 0.3 * 0.5) <= 1e-12

    def test_reduces_to_rdpg_bitwise(self):
        spec = _mmsbm_spec()
        lat = LatentPositions(x=spec.theta @ spec.x_star, rho=spec.rho)
        direct = sample_rdpg(lat, seed=33)
        viamodel = sample_mmsbm(spec, seed=33)
        assert np.array_equal(direct.a, viamodel.a)
        assert np.array_equal(direct.truth.p, viamodel.truth.p)


class TestClosedFormTruths:
    def test_two_block_eigenpairs(self):
        spec = SbmSpec(n=100, rho=0.2, a=0.9, b=0.05)
        truth = two_block_truth(spec)
        np.testing.assert_allclose(
            truth.lam, [100 * 0.2 * 0.475, 100 * 0.2 * 0.425], atol=1e-12
        )
        np.testing.assert_allclose(truth.p @ truth.u, truth.u * truth.lam, atol=1e-10)
        np.testing.assert_allclose(truth.v, truth.u * np.sqrt(truth.lam), atol=1e-12)
        np.testing.assert_allclose(truth.u.T @ truth.u, np.eye(2), atol=1e-12)

    def test_two_block_limit_variances(self):
        truth = two_block_truth(SbmSpec(n=10, rho=0.5, a=0.9, b=0.05))
        np.testing.assert_allclose(truth.var_scaled, 0.95 / 0.85, atol=1e-12)
        np.testing.assert_allclose(truth.var_unscaled, 2.0 * 0.95 / 0.85**2, atol=1e-12)

    def test_two_block_equal_probabilities_degenerate(self):
        truth = two_block_truth(SbmSpec(n=10, rho=0.5, a=0.4, b=0.4))
        assert truth.lam[1] == 0.0
        assert math.isinf(truth.var_scaled)

    def test_rank_one_eigenpair(self):
        spec = SbmSpec(n=80, rho=0.4, p_val=0.95, q_val=0.3)
        truth = rank1_sbm_truth(spec)
        np.testing.assert_allclose(truth.lam, 80 * 0.4 * 0.49625, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(truth.u_p), 1.0, atol=1e-12)
        np.testing.assert_allclose(truth.p @ truth.u_p, truth.lam * truth.u_p, atol=1e-10)

    def test_truth_requires_matching_pair(self):
        with pytest.raises(ConfigError):
            two_block_truth(SbmSpec(n=10, rho=0.5, p_val=0.95, q_val=0.3))
        with pytest.raises(ConfigError):
            rank1_sbm_truth(SbmSpec(n=10, rho=0.5, a=0.9, b=0.05))
