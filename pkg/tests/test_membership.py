"""Tests for vertex hunting, membership profiles, and pure-node selection.

Ground truths used here: on the three-row instance {e1, e2, midpoint} the
greedy selection provably picks the two coordinate rows; on a noiseless
mixture mean the eigenvector rows of pure nodes are simplex corners, so the
profile inversion reproduces the true membership matrix up to a column
permutation; and an n x n projector reimplementation of the selection serves
as a brute-force oracle for the factored implementation.
"""

import math

import numpy as np
import pytest

from eigenrows import (
    DegenerateError,
    DimensionError,
    DomainError,
    MembershipEstimate,
    MmsbmSpec,
    NotFoundError,
    SingularError,
    SizeError,
    SymObservation,
    Truth,
    align_permutation,
    ase_embed,
    estimate_membership,
    one_step_refine,
    procrustes_align,
    pure_node_estimates,
    pure_node_indices,
    sample_mmsbm,
    spa_select,
    two_to_infinity_norm,
    unscaled_embed,
)


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


def _noiseless_obs(spec):
    x = spec.theta @ spec.x_star
    p = spec.rho * (x @ x.T)
    return SymObservation(a=p, truth=Truth(p=p))


def _projector_spa(u_a, d):
    """Selection oracle materializing the full projector, with its scores."""
    b = np.asarray(u_a, dtype=np.float64).copy()
    picked, picked_scores = [], []
    for _ in range(d):
        r = b @ b.T
        scores = np.sum(r * r, axis=0)
        j_star = int(np.argmax(scores))
        picked.append(j_star)
        picked_scores.append(float(scores[j_star]))
        u = r[:, j_star]
        b = b - np.outer(u, u @ b) / float(u @ u)
    return picked, picked_scores


class TestSpaSelect:
    def test_three_row_instance(self):
        u = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        assert spa_select(u, 2, check_orthonormal=False) == [0, 1]

    def test_matches_projector_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            q, _ = np.linalg.qr(rng.standard_normal((25, 3)))
            picked, scores = _projector_spa(q, 3)
            assert spa_select(q, 3) == picked
            assert scores == sorted(scores, reverse=True)

    def test_noiseless_mixture_picks_pure_rows(self):
        spec = _mmsbm_spec(n=60, n_pure=15)
        obs = _noiseless_obs(spec)
        u_p = unscaled_embed(obs, 2, 0).coords
        picked = spa_select(u_p, 2)
        assert len(set(picked)) == 2
        for j in picked:
            assert spec.theta[j].max() == 1.0

    def test_single_column_picks_max_norm_row(self):
        u = np.array([[0.1], [0.9], [0.3]])
        assert spa_select(u, 1, check_orthonormal=False) == [1]

    def test_invariant_under_column_rotation(self):
        rng = np.random.default_rng(7)
        q, _ = np.linalg.qr(rng.standard_normal((30, 2)))
        base = spa_select(q, 2)
        for _ in range(5):
            rot, _ = np.linalg.qr(rng.standard_normal((2, 2)))
            assert spa_select(q @ rot, 2) == base

    def test_rank_deficient_input_raises(self):
        u = np.column_stack([np.full(4, 0.5), np.zeros(4)])
        with pytest.raises(DegenerateError):
            spa_select(u, 2, check_orthonormal=False)

    def test_wrong_column_count_raises(self):
        with pytest.raises(DimensionError):
            spa_select(np.ones((4, 3)), 2, check_orthonormal=False)

    def test_nonorthonormal_columns_raise(self):
        u = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        with pytest.raises(DomainError):
            spa_select(u, 2)


class TestEstimateMembership:
    def test_noiseless_profiles_recovered(self):
        spec = _mmsbm_spec(n=60, n_pure=15)
        obs = _noiseless_obs(spec)
        u_p = unscaled_embed(obs, 2, 0).coords
        est = estimate_membership(u_p, spa_select(u_p, 2))
        perm = align_permutation(est.theta_hat, spec.theta)
        np.testing.assert_allclose(est.theta_hat, spec.theta[:, perm], atol=1e-10)

    def test_selected_rows_become_coordinate_vectors(self):
        spec = _mmsbm_spec(n=50, n_pure=12)
        obs = sample_mmsbm(spec, seed=3)
        u_a = unscaled_embed(obs, 2, 0).coords
        picked = spa_select(u_a, 2)
        est = estimate_membership(u_a, picked)
        assert est.spa_indices == tuple(picked)
        np.testing.assert_allclose(est.theta_hat[picked], np.eye(2), atol=1e-10)

    def test_duplicate_indices_raise(self):
        rng = np.random.default_rng(9)
        q, _ = np.linalg.qr(rng.standard_normal((20, 2)))
        with pytest.raises(SingularError):
            estimate_membership(q, [5, 5])

    def test_wrong_index_count_raises(self):
        rng = np.random.default_rng(9)
        q, _ = np.linalg.qr(rng.standard_normal((20, 2)))
        with pytest.raises(DimensionError):
            estimate_membership(q, [5])

    def test_error_shrinks_as_density_grows(self):
        errors = []
        for rho in (0.08, 0.25, 0.6):
            spec = _mmsbm_spec(n=900, n_pure=180, rho=rho)
            errs = []
            for seed in range(6):
                obs = sample_mmsbm(spec, seed=100 + seed)
                u_a = unscaled_embed(obs, 2, 0).coords
                est = estimate_membership(u_a, spa_select(u_a, 2))
                perm = align_permutation(est.theta_hat, spec.theta)
                errs.append(two_to_infinity_norm(est.theta_hat - spec.theta[:, perm]))
            errors.append(float(np.mean(errs)))
        assert errors[0] > errors[1] > errors[2]


class TestPureNodeIndices:
    def test_first_qualifying_row_wins(self):
        theta = np.full((10, 2), 0.5)
        theta[7] = [1.0, 0.0]
        theta[9] = [0.0, 1.0]
        est = MembershipEstimate(theta_hat=theta, spa_indices=(7, 9))
        iota = pure_node_indices(est, 0.1)
        assert iota == [7, 9]
        assert est.iota == [7, 9]
        assert est.eta == 0.1

    def test_no_qualifying_rows_reported_as_none(self):
        est = MembershipEstimate(theta_hat=np.full((6, 2), 0.5), spa_indices=(0, 1))
        assert pure_node_indices(est, 1e-4) == [None, None]

    def test_monotone_in_threshold(self):
        spec = _mmsbm_spec(n=80, n_pure=20)
        obs = sample_mmsbm(spec, seed=17)
        u_a = unscaled_embed(obs, 2, 0).coords
        est = estimate_membership(u_a, spa_select(u_a, 2))
        small = pure_node_indices(est, 0.05)
        large = pure_node_indices(est, 0.2)
        for tight, loose in zip(small, large):
            if tight is not None:
                assert loose is not None
                assert loose <= tight

    def test_nonpositive_threshold_raises(self):
        est = MembershipEstimate(theta_hat=np.eye(4)[:, :2], spa_indices=(0, 1))
        with pytest.raises(DomainError):
            pure_node_indices(est, 0.0)


class TestAlignPermutation:
    def test_identity(self):
        theta = np.random.default_rng(1).uniform(size=(12, 3))
        assert align_permutation(theta, theta) == (0, 1, 2)

    def test_column_swap(self):
        theta = np.random.default_rng(2).uniform(size=(12, 2))
        assert align_permutation(theta[:, [1, 0]], theta) == (1, 0)

    def test_plant_and_recover(self):
        rng = np.random.default_rng(3)
        theta = rng.uniform(size=(40, 4))
        perm = (2, 0, 3, 1)
        noisy = theta[:, perm] + 0.01 * rng.standard_normal((40, 4))
        assert align_permutation(noisy, theta) == perm

    def test_shape_mismatch_raises(self):
        with pytest.raises(DimensionError):
            align_permutation(np.ones((5, 2)), np.ones((5, 3)))

    def test_large_dimension_raises(self):
        with pytest.raises(SizeError):
            align_permutation(np.ones((3, 9)), np.ones((3, 9)))


class TestPureNodeEstimates:
    def test_extracts_requested_rows(self):
        spec = _mmsbm_spec(n=50, n_pure=12)
        obs = sample_mmsbm(spec, seed=21)
        scaled = ase_embed(obs, 2, 0)
        refined = one_step_refine(obs, scaled)
        rows = pure_node_estimates(scaled, refined, [1, 2])
        np.testing.assert_array_equal(rows[0][0], scaled.coords[1])
        np.testing.assert_array_equal(rows[0][1], refined.coords[1])
        np.testing.assert_array_equal(rows[1][0], scaled.coords[2])
        np.testing.assert_array_equal(rows[1][1], refined.coords[2])

    def test_noiseless_rows_align_to_corner_positions(self):
        spec = _mmsbm_spec(n=60, n_pure=15)
        obs = _noiseless_obs(spec)
        scaled = ase_embed(obs, 2, 0)
        u_p = unscaled_embed(obs, 2, 0).coords
        est = estimate_membership(u_p, spa_select(u_p, 2))
        iota = pure_node_indices(est, 0.1)
        rows = pure_node_estimates(scaled, scaled, iota)
        got = np.vstack([rows[k][0] for k in range(2)])
        communities = [int(np.argmax(spec.theta[i])) for i in iota]
        target = np.sqrt(spec.rho) * spec.x_star[communities]
        aligner = procrustes_align(got, target)
        np.testing.assert_allclose(got @ aligner.w, target, atol=1e-8)

    def test_missing_pure_node_raises(self):
        spec = _mmsbm_spec(n=50, n_pure=12)
        obs = sample_mmsbm(spec, seed=23)
        scaled = ase_embed(obs, 2, 0)
        with pytest.raises(NotFoundError, match="communities"):
            pure_node_estimates(scaled, scaled, [3, None])
