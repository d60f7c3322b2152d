"""Per-kind experiment recipes: contexts, replicate pipelines, and targets.

Each experiment kind owns a context builder (deterministic, cached per
config) and a replicate function mapping (cfg, ctx, seed) to a flat dict of
named scalars.  The harness aggregates those records; the targets function
names which records have asymptotic normal references and with what mean
and standard deviation.
"""

import math

import numpy as np

from . import diagnostics, embedding, lptest, membership, models
from .errors import ConfigError
from .spectral import procrustes_align, signed_truncated_eig

KINDS = ("twoBlockSbm", "rank1Sbm", "snmc", "mmsbmPure", "lpTestPower", "lpTestSize")


def resolve_rho(cfg):
    """Explicit rho if configured, else sparsity_c * (log n)^sparsity_k / n."""
    if cfg.rho is not None:
        return float(cfg.rho)
    return cfg.sparsity_c * math.log(cfg.n) ** cfg.sparsity_k / cfg.n


def _column_sign(est_col, true_col):
    """Scalar sign aligning an estimated eigenvector column to the truth."""
    return 1.0 if float(est_col @ true_col) >= 0.0 else -1.0


def _two_block_ctx(cfg):
    rho = resolve_rho(cfg)
    spec = models.SbmSpec(n=cfg.n, rho=rho, a=cfg.a, b=cfg.b)
    truth = models.two_block_truth(spec)
    ctx = {"rho": rho, "truth": truth}
    if cfg.kind == "snmc":
        ctx["snmc_spec"] = models.SnmcSpec.from_tau(truth.lat, cfg.tau)
        a, b = cfg.a, cfg.b
        if a == b:
            ctx["var_scaled"] = math.inf
            ctx["var_unscaled"] = math.inf
        else:
            ctx["var_scaled"] = (a * a + b * b) / (a - b)
            ctx["var_unscaled"] = 2.0 * (a * a + b * b) / (a - b) ** 2
    else:
        ctx["var_scaled"] = truth.var_scaled
        ctx["var_unscaled"] = truth.var_unscaled
    return ctx


def _rank1_ctx(cfg):
    rho = resolve_rho(cfg)
    spec = models.SbmSpec(n=cfg.n, rho=rho, p_val=cfg.p_val, q_val=cfg.q_val)
    truth = models.rank1_sbm_truth(spec)
    g_info = embedding.theoretical_g(truth.lat, cfg.vertex).g_info
    sigma = embedding.theoretical_sigma_rdpg(truth.lat, cfg.vertex).sigma
    return {
        "rho": rho,
        "truth": truth,
        "var_scaled": float(sigma[0, 0]),
        "var_refined": 1.0 / float(g_info[0, 0]),
    }


def _mmsbm_ctx(cfg):
    rho = resolve_rho(cfg)
    x_star = np.array([
        [math.sqrt((cfg.b_diag + cfg.b_off) / 2.0),
         math.sqrt((cfg.b_diag - cfg.b_off) / 2.0)],
        [math.sqrt((cfg.b_diag + cfg.b_off) / 2.0),
         -math.sqrt((cfg.b_diag - cfg.b_off) / 2.0)],
    ])
    n_pure = cfg.n_pure
    n_mixed = cfg.n - 2 * n_pure
    theta = np.zeros((cfg.n, 2))
    theta[:n_pure, 0] = 1.0
    theta[n_pure:2 * n_pure, 1] = 1.0
    if n_mixed:
        t = np.linspace(cfg.t_min, cfg.t_max, n_mixed)
        theta[2 * n_pure:, 0] = 1.0 - t
        theta[2 * n_pure:, 1] = t
    spec = models.MmsbmSpec(theta=theta, x_star=x_star, rho=rho)
    x_true = theta @ x_star
    ctx = {
        "rho": rho,
        "spec": spec,
        "theta": theta,
        "x_star": x_star,
        "x_true": x_true,
        "null_pairs": [(0, 1), (n_pure, n_pure + 1)],
        "alt_pairs": [],
        "alt_distances": [],
    }
    if cfg.alt_count:
        if not n_mixed:
            raise ConfigError("alternatives need mixed-membership vertices")
        picks = np.round(np.linspace(0, n_mixed - 1, cfg.alt_count)).astype(int)
        for k in picks:
            j = 2 * n_pure + int(k)
            ctx["alt_pairs"].append((0, j))
            ctx["alt_distances"].append(float(np.linalg.norm(x_true[0] - x_true[j])))
    return ctx


_CTX_BUILDERS = {
    "twoBlockSbm": _two_block_ctx,
    "snmc": _two_block_ctx,
    "rank1Sbm": _rank1_ctx,
    "mmsbmPure": _mmsbm_ctx,
    "lpTestPower": _mmsbm_ctx,
    "lpTestSize": _mmsbm_ctx,
}

_CTX_CACHE = {}


def context_for(cfg):
    """Deterministic per-config context, cached per process."""
    ctx = _CTX_CACHE.get(cfg)
    if ctx is None:
        ctx = _CTX_BUILDERS[cfg.kind](cfg)
        _CTX_CACHE[cfg] = ctx
    return ctx


def sample_once(cfg, seed):
    """One observation from the configured model, for the standalone stages."""
    ctx = context_for(cfg)
    if cfg.kind == "snmc":
        return models.sample_snmc(ctx["snmc_spec"], seed)
    if cfg.kind in ("mmsbmPure", "lpTestPower", "lpTestSize"):
        return models.sample_mmsbm(ctx["spec"], seed)
    return models.sample_rdpg(ctx["truth"].lat, seed)


def _replicate_two_block(cfg, ctx, seed):
    truth = ctx["truth"]
    if cfg.kind == "snmc":
        obs = models.sample_snmc(ctx["snmc_spec"], seed)
    else:
        obs = models.sample_rdpg(truth.lat, seed)
    eig = signed_truncated_eig(obs.a, cfg.n_pos, cfg.n_neg)
    emb_s = embedding.ase_embed(obs, cfg.n_pos, cfg.n_neg, eig=eig)
    emb_u = embedding.unscaled_embed(obs, cfg.n_pos, cfg.n_neg, eig=eig)
    v = cfg.vertex
    root_n = math.sqrt(cfg.n)
    scale_u = cfg.n * math.sqrt(ctx["rho"])
    recs_s = diagnostics.decompose_scaled(obs, emb_s)
    recs_u = diagnostics.decompose_unscaled(obs, emb_u)
    return {
        "scaled_coord2": root_n * recs_s[v].total_error[1],
        "unscaled_coord2": scale_u * recs_u[v].total_error[1],
        "linear_scaled_coord2": root_n * recs_s[v].linear_term[1],
        "linear_unscaled_coord2": scale_u * recs_u[v].linear_term[1],
        "remainder_sup_scaled": root_n * recs_s[v].remainder_two_inf,
        "remainder_sup_unscaled": scale_u * recs_u[v].remainder_two_inf,
    }


def _replicate_rank1(cfg, ctx, seed):
    truth = ctx["truth"]
    obs = models.sample_rdpg(truth.lat, seed)
    emb_s = embedding.ase_embed(obs, cfg.n_pos, cfg.n_neg)
    refined = embedding.one_step_refine(obs, emb_s)
    target = math.sqrt(ctx["rho"]) * truth.lat.x
    w = _column_sign(emb_s.coords[:, 0], target[:, 0])
    v = cfg.vertex
    root_n = math.sqrt(cfg.n)
    err_ase = float(np.sum((w * emb_s.coords - target) ** 2))
    err_ose = float(np.sum((w * refined.coords - target) ** 2))
    return {
        "scaled_coord1": root_n * (w * emb_s.coords[v, 0] - target[v, 0]),
        "refined_coord1": root_n * (w * refined.coords[v, 0] - target[v, 0]),
        "err_ase": err_ase,
        "err_ose": err_ose,
    }


def _replicate_mmsbm(cfg, ctx, seed):
    obs = models.sample_mmsbm(ctx["spec"], seed)
    eig = signed_truncated_eig(obs.a, cfg.n_pos, cfg.n_neg)
    emb_s = embedding.ase_embed(obs, cfg.n_pos, cfg.n_neg, eig=eig)
    emb_u = embedding.unscaled_embed(obs, cfg.n_pos, cfg.n_neg, eig=eig)
    refined = embedding.one_step_refine(obs, emb_s)
    picks = membership.spa_select(emb_u.coords, emb_u.d)
    est = membership.estimate_membership(emb_u.coords, picks)
    iota = membership.pure_node_indices(est, cfg.eta)
    perm = membership.align_permutation(est.theta_hat, ctx["theta"])
    est.permutation = perm
    target_all = math.sqrt(ctx["rho"]) * ctx["x_true"]
    w = procrustes_align(emb_s.coords, target_all).w
    emb_s_al = embedding.Embedding(coords=emb_s.coords @ w, kind="scaled",
                                   split=emb_s.split)
    emb_r_al = embedding.Embedding(coords=refined.coords @ w, kind="refined",
                                   split=emb_s.split)
    pure = membership.pure_node_estimates(emb_s_al, emb_r_al, iota)
    rec = {}
    for k, (row_ase, row_ose) in pure.items():
        label = perm[k]
        target = math.sqrt(ctx["rho"]) * ctx["x_star"][label]
        rec[f"sqerr_ase_l{label}"] = float(np.sum((row_ase - target) ** 2))
        rec[f"sqerr_ose_l{label}"] = float(np.sum((row_ose - target) ** 2))
        for c in range(row_ase.size):
            rec[f"ase_l{label}_c{c}"] = float(row_ase[c] - target[c])
            rec[f"ose_l{label}_c{c}"] = float(row_ose[c] - target[c])
    first_pure = all(iota[k] == perm[k] * cfg.n_pure for k in range(len(iota)))
    in_block = all(
        perm[k] * cfg.n_pure <= iota[k] < (perm[k] + 1) * cfg.n_pure
        for k in range(len(iota))
    )
    rec["iota_first_match"] = 1.0 if first_pure else 0.0
    rec["iota_block_match"] = 1.0 if in_block else 0.0
    return rec


def _replicate_lptest(cfg, ctx, seed):
    obs = models.sample_mmsbm(ctx["spec"], seed)
    emb_s = embedding.ase_embed(obs, cfg.n_pos, cfg.n_neg)
    refined = embedding.one_step_refine(obs, emb_s)
    rec = {}
    for idx, (i, j) in enumerate(ctx["null_pairs"]):
        res_a = lptest.t_ase(emb_s, i, j, alpha=cfg.alpha)
        res_o = lptest.t_ose(refined, emb_s, i, j, alpha=cfg.alpha)
        rec[f"reject_ase_null{idx}"] = float(res_a.reject)
        rec[f"reject_ose_null{idx}"] = float(res_o.reject)
    for m, (i, j) in enumerate(ctx["alt_pairs"]):
        res_a = lptest.t_ase(emb_s, i, j, alpha=cfg.alpha)
        res_o = lptest.t_ose(refined, emb_s, i, j, alpha=cfg.alpha)
        rec[f"reject_ase_alt{m}"] = float(res_a.reject)
        rec[f"reject_ose_alt{m}"] = float(res_o.reject)
    return rec


REPLICATE_FNS = {
    "twoBlockSbm": _replicate_two_block,
    "snmc": _replicate_two_block,
    "rank1Sbm": _replicate_rank1,
    "mmsbmPure": _replicate_mmsbm,
    "lpTestPower": _replicate_lptest,
    "lpTestSize": _replicate_lptest,
}


def run_replicate(cfg, r):
    """Record dict for replicate r, seeded with base_seed + r."""
    ctx = context_for(cfg)
    return REPLICATE_FNS[cfg.kind](cfg, ctx, cfg.base_seed + r)


def targets(cfg, ctx):
    """Named records with asymptotic normal references: name -> (mean, sd)."""
    if cfg.kind in ("twoBlockSbm", "snmc"):
        out = {}
        if math.isfinite(ctx["var_scaled"]):
            sd = math.sqrt(ctx["var_scaled"])
            out["scaled_coord2"] = (0.0, sd)
            out["linear_scaled_coord2"] = (0.0, sd)
        if math.isfinite(ctx["var_unscaled"]):
            sd = math.sqrt(ctx["var_unscaled"])
            out["unscaled_coord2"] = (0.0, sd)
            out["linear_unscaled_coord2"] = (0.0, sd)
        return out
    if cfg.kind == "rank1Sbm":
        return {
            "scaled_coord1": (0.0, math.sqrt(ctx["var_scaled"])),
            "refined_coord1": (0.0, math.sqrt(ctx["var_refined"])),
        }
    return {}
