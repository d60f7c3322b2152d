"""Entrywise analysis of spectral embeddings for signal-plus-noise matrices.

Samplers, scaled and unscaled spectral embeddings, a one-step likelihood
refinement, truth-based error decompositions, mixed-membership estimation,
latent-position equality tests, and a seeded Monte Carlo harness.
"""

__version__ = "0.1.0"

from ._kernels import ACTIVE_KERNEL
from .diagnostics import DecompositionRecord, decompose_scaled, decompose_unscaled, remainder_profile
from .embedding import (
    CovarianceEstimate,
    Embedding,
    ase_embed,
    one_step_refine,
    plugin_g,
    plugin_sigma,
    score_and_fisher,
    theoretical_g,
    theoretical_sigma_rdpg,
    theoretical_sigma_snmc,
    unscaled_embed,
)
from .errors import (
    ConfigError,
    DegenerateError,
    DimensionError,
    DomainError,
    EigenrowsError,
    NotFoundError,
    ProbabilityError,
    RankError,
    SingularError,
    SingularFisherError,
    SizeError,
    SpectrumError,
    TruthMissingError,
)
from .harness import (
    ExperimentConfig,
    McReport,
    default_config,
    emit_report,
    ks_against_normal,
    mse_table,
    power_table,
    run_experiment,
)
from .lptest import Chi2Params, TestResult, chi2_cdf, chi2_quantile, t_ase, t_ose, theoretical_power
from .membership import (
    MembershipEstimate,
    align_permutation,
    estimate_membership,
    pure_node_estimates,
    pure_node_indices,
    spa_select,
)
from .models import (
    LatentPositions,
    MmsbmSpec,
    SbmSpec,
    SnmcSpec,
    SymObservation,
    Truth,
    rank1_sbm_truth,
    sample_mmsbm,
    sample_rdpg,
    sample_snmc,
    two_block_truth,
)
from .spectral import (
    OrthogonalAligner,
    SignedEigenPair,
    delta_matrix,
    infer_rank_split,
    matrix_sign,
    procrustes_align,
    signed_truncated_eig,
    two_to_infinity_norm,
)

__all__ = [
    "ACTIVE_KERNEL",
    "Chi2Params",
    "ConfigError",
    "CovarianceEstimate",
    "DecompositionRecord",
    "DegenerateError",
    "DimensionError",
    "DomainError",
    "EigenrowsError",
    "Embedding",
    "ExperimentConfig",
    "LatentPositions",
    "McReport",
    "MembershipEstimate",
    "MmsbmSpec",
    "NotFoundError",
    "OrthogonalAligner",
    "ProbabilityError",
    "RankError",
    "SbmSpec",
    "SignedEigenPair",
    "SingularError",
    "SingularFisherError",
    "SizeError",
    "SnmcSpec",
    "SpectrumError",
    "SymObservation",
    "TestResult",
    "Truth",
    "TruthMissingError",
    "__version__",
    "align_permutation",
    "ase_embed",
    "chi2_cdf",
    "chi2_quantile",
    "decompose_scaled",
    "decompose_unscaled",
    "default_config",
    "delta_matrix",
    "emit_report",
    "estimate_membership",
    "infer_rank_split",
    "ks_against_normal",
    "matrix_sign",
    "mse_table",
    "one_step_refine",
    "plugin_g",
    "plugin_sigma",
    "power_table",
    "procrustes_align",
    "pure_node_estimates",
    "pure_node_indices",
    "rank1_sbm_truth",
    "remainder_profile",
    "run_experiment",
    "sample_mmsbm",
    "sample_rdpg",
    "sample_snmc",
    "score_and_fisher",
    "signed_truncated_eig",
    "spa_select",
    "t_ase",
    "t_ose",
    "theoretical_g",
    "theoretical_power",
    "theoretical_sigma_rdpg",
    "theoretical_sigma_snmc",
    "two_block_truth",
    "two_to_infinity_norm",
    "unscaled_embed",
]
