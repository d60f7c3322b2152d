"""Command-line front end.

Subcommands cover the pipeline stages (sample, embed, refine, spa,
membership, test) and the Monte Carlo runner (mc).  Every invocation writes
its outputs plus a run manifest under --out; exit code 0 means success, 1 a
configuration problem, 2 a runtime or numerical failure.
"""

import argparse
import csv
import hashlib
import io
import json
import os
import sys

import numpy as np

from . import __version__
from ._kernels import ACTIVE_KERNEL
from .config import dump_default, parse_config
from .embedding import ase_embed, one_step_refine, unscaled_embed
from .errors import ConfigError, EigenrowsError
from .experiments import sample_once
from .harness import emit_report, run_experiment
from .lptest import t_ase, t_ose
from .membership import estimate_membership, pure_node_indices, spa_select
from .models import LatentPositions, SymObservation, Truth


def _fmt(value):
    return format(float(value), ".17g")


def _atomic_write(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write(path, buf.getvalue())


def _save_observation(path, obs):
    tmp = path + ".tmp"
    with open(tmp, "wb") as handle:
        np.savez(handle, a=obs.a, p=obs.truth.p, x=obs.truth.latent.x,
                 rho=np.float64(obs.truth.latent.rho),
                 seed=np.int64(obs.seed if obs.seed is not None else -1))
    os.replace(tmp, path)


def _load_observation(path):
    with np.load(path) as data:
        lat = LatentPositions(x=data["x"], rho=float(data["rho"]))
        seed = int(data["seed"])
        return SymObservation(a=data["a"], truth=Truth(p=data["p"], latent=lat),
                              seed=seed if seed >= 0 else None)


def _write_manifest(outdir, subcommand, config_path, seed):
    digest = hashlib.sha256()
    with open(config_path, "rb") as handle:
        digest.update(handle.read())
    manifest = {
        "subcommand": subcommand,
        "config_sha256": digest.hexdigest(),
        "seed": int(seed),
        "version": __version__,
        "kernel": ACTIVE_KERNEL,
    }
    _atomic_write(os.path.join(outdir, "run_manifest.json"),
                  json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _load_for(args, out):
    path = args.obs if args.obs is not None else os.path.join(out, "observation.npz")
    if not os.path.exists(path):
        raise FileNotFoundError(f"no observation at {path}; run sample first")
    return _load_observation(path)


def _emit_embedding_rows(emb):
    rows = []
    for i in range(emb.n):
        for c in range(emb.d):
            rows.append([str(i), str(c), _fmt(emb.coords[i, c]), emb.kind])
    return rows


def _cmd_sample(args, cfg, out):
    seed = args.seed if args.seed is not None else cfg.base_seed
    obs = sample_once(cfg, seed)
    _save_observation(os.path.join(out, "observation.npz"), obs)
    return seed


def _cmd_embed(args, cfg, out):
    obs = _load_for(args, out)
    scaled = ase_embed(obs, cfg.n_pos, cfg.n_neg)
    unscaled = unscaled_embed(obs, cfg.n_pos, cfg.n_neg, eig=scaled.source_eig)
    rows = _emit_embedding_rows(scaled) + _emit_embedding_rows(unscaled)
    _write_csv(os.path.join(out, "embeddings.csv"),
               ["vertex", "coord", "value", "kind"], rows)
    return obs.seed if obs.seed is not None else cfg.base_seed


def _cmd_refine(args, cfg, out):
    obs = _load_for(args, out)
    scaled = ase_embed(obs, cfg.n_pos, cfg.n_neg)
    refined = one_step_refine(obs, scaled)
    _write_csv(os.path.join(out, "refined.csv"),
               ["vertex", "coord", "value", "kind"],
               _emit_embedding_rows(refined))
    return obs.seed if obs.seed is not None else cfg.base_seed


def _cmd_spa(args, cfg, out):
    obs = _load_for(args, out)
    unscaled = unscaled_embed(obs, cfg.n_pos, cfg.n_neg)
    picks = spa_select(unscaled.coords, unscaled.d)
    _write_csv(os.path.join(out, "spa.csv"), ["order", "vertex"],
               [[str(k), str(v)] for k, v in enumerate(picks)])
    return obs.seed if obs.seed is not None else cfg.base_seed


def _cmd_membership(args, cfg, out):
    obs = _load_for(args, out)
    unscaled = unscaled_embed(obs, cfg.n_pos, cfg.n_neg)
    picks = spa_select(unscaled.coords, unscaled.d)
    est = estimate_membership(unscaled.coords, picks)
    iota = pure_node_indices(est, cfg.eta)
    theta_rows = []
    for i in range(est.n):
        for k in range(est.d):
            theta_rows.append([str(i), str(k), _fmt(est.theta_hat[i, k])])
    _write_csv(os.path.join(out, "theta.csv"),
               ["vertex", "community", "weight"], theta_rows)
    _write_csv(os.path.join(out, "iota.csv"), ["community", "vertex"],
               [[str(k), "" if v is None else str(v)] for k, v in enumerate(iota)])
    return obs.seed if obs.seed is not None else cfg.base_seed


def _cmd_test(args, cfg, out):
    obs = _load_for(args, out)
    i, j = args.pair
    scaled = ase_embed(obs, cfg.n_pos, cfg.n_neg)
    refined = one_step_refine(obs, scaled)
    results = [
        t_ase(scaled, i, j, alpha=cfg.alpha),
        t_ose(refined, scaled, i, j, alpha=cfg.alpha),
    ]
    _write_csv(os.path.join(out, "tests.csv"),
               ["i", "j", "kind", "statistic", "pvalue", "reject"],
               [[str(i), str(j), res.kind, _fmt(res.statistic), _fmt(res.p_value),
                 "1" if res.reject else "0"] for res in results])
    return obs.seed if obs.seed is not None else cfg.base_seed


def _cmd_mc(args, cfg, out):
    report = run_experiment(cfg, workers=args.workers)
    emit_report(report, out)
    return cfg.base_seed


_COMMANDS = {
    "sample": _cmd_sample,
    "embed": _cmd_embed,
    "refine": _cmd_refine,
    "spa": _cmd_spa,
    "membership": _cmd_membership,
    "test": _cmd_test,
    "mc": _cmd_mc,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="eigenrows",
        description="Spectral embedding experiments for signal-plus-noise matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sample", "draw one observation from the configured model"),
        ("embed", "scaled and unscaled embeddings of a saved observation"),
        ("refine", "one-step refinement of the scaled embedding"),
        ("spa", "successive projection vertex hunting"),
        ("membership", "membership profiles and pure-node indices"),
        ("test", "latent position equality tests for one vertex pair"),
        ("mc", "run a full Monte Carlo experiment"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="path to an INI config file")
        cmd.add_argument("--out", help="output directory")
        cmd.add_argument("-v", "--verbose", action="count", default=0,
                         help="print progress details")
        if name == "sample":
            cmd.add_argument("--seed", type=int, default=None,
                             help="override the config base seed")
        if name in ("embed", "refine", "spa", "membership", "test"):
            cmd.add_argument("--obs", default=None,
                             help="observation file (default <out>/observation.npz)")
        if name == "test":
            cmd.add_argument("--pair", type=int, nargs=2, required=True,
                             metavar=("I", "J"), help="vertex pair to compare")
        if name == "mc":
            cmd.add_argument("--workers", type=int, default=None,
                             help="worker process count")
            cmd.add_argument("--dump-default", metavar="KIND", default=None,
                             help="print the default config for KIND and exit")
    return parser


def main(argv=None):
    """Entry point; returns the process exit code instead of raising."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "mc" and args.dump_default is not None:
            sys.stdout.write(dump_default(args.dump_default))
            return 0
        if args.config is None:
            raise ConfigError(f"{args.command} requires --config")
        cfg, output = parse_config(args.config)
        out = args.out if args.out is not None else output["dir"]
        if out is None:
            raise ConfigError(f"{args.command} requires --out or an [output] dir")
        os.makedirs(out, exist_ok=True)
        if args.verbose:
            sys.stderr.write(f"running {args.command} with kind={cfg.kind} "
                             f"n={cfg.n}\n")
        seed = _COMMANDS[args.command](args, cfg, out)
        _write_manifest(out, args.command, args.config, seed)
        return 0
    except (ConfigError, FileNotFoundError) as exc:
        sys.stderr.write(f"ERROR {type(exc).__name__}: {exc}\n")
        return 1
    except EigenrowsError as exc:
        sys.stderr.write(f"ERROR {type(exc).__name__}: {exc}\n")
        return 2
    except Exception as exc:
        sys.stderr.write(f"ERROR {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
