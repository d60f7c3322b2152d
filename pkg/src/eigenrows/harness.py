"""Seeded Monte Carlo harness: configs, the replicate loop, and report emission.

Replicate r of a run always uses seed base_seed + r, so reports are
bit-identical across reruns and across worker counts; aggregation follows
replicate index order regardless of completion order.
"""

import csv
import dataclasses
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from . import experiments
from .errors import ConfigError, DegenerateError, DomainError

WORKERS_ENV = "EIGENROWS_WORKERS"
_FAIL_FRACTION = 0.01
_KS_MIN_SAMPLES = 20


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, hashable description of one Monte Carlo experiment."""

    kind: str
    n: int
    replicates: int
    base_seed: int = 20240601
    alpha: float = 0.05
    eta: float = 0.1
    vertex: int = 0
    n_pos: int = 1
    n_neg: int = 0
    sparsity_c: float = 5.0
    sparsity_k: float = 1.0
    rho: float | None = None
    alt_count: int = 0
    workers: int = 0
    emit_histograms: bool = False
    a: float | None = None
    b: float | None = None
    p_val: float | None = None
    q_val: float | None = None
    tau: float | None = None
    n_pure: int | None = None
    t_min: float | None = None
    t_max: float | None = None
    b_diag: float | None = None
    b_off: float | None = None


_KIND_DEFAULTS = {
    "twoBlockSbm": dict(n=1000, replicates=300, n_pos=2, a=0.9, b=0.05,
                        sparsity_c=5.0, sparsity_k=1.0),
    "snmc": dict(n=1000, replicates=300, n_pos=2, a=0.9, b=0.05, tau=1.0,
                 sparsity_c=5.0, sparsity_k=1.0),
    "rank1Sbm": dict(n=1000, replicates=200, n_pos=1, p_val=0.95, q_val=0.3,
                     sparsity_c=5.0, sparsity_k=1.5),
    "mmsbmPure": dict(n=1500, replicates=300, n_pos=2, n_pure=300, t_min=0.2,
                      t_max=0.8, b_diag=0.9, b_off=0.1, sparsity_c=5.0,
                      sparsity_k=1.5),
    "lpTestPower": dict(n=1500, replicates=1000, n_pos=2, n_pure=300, t_min=0.2,
                        t_max=0.8, b_diag=0.9, b_off=0.1, sparsity_c=5.0,
                        sparsity_k=1.5, alt_count=9),
    "lpTestSize": dict(n=1500, replicates=1000, n_pos=2, n_pure=300, t_min=0.2,
                       t_max=0.8, b_diag=0.9, b_off=0.1, sparsity_c=5.0,
                       sparsity_k=1.5),
}

_REQUIRED_FIELDS = {
    "twoBlockSbm": ("a", "b"),
    "snmc": ("a", "b", "tau"),
    "rank1Sbm": ("p_val", "q_val"),
    "mmsbmPure": ("n_pure", "t_min", "t_max", "b_diag", "b_off"),
    "lpTestPower": ("n_pure", "t_min", "t_max", "b_diag", "b_off"),
    "lpTestSize": ("n_pure", "t_min", "t_max", "b_diag", "b_off"),
}


def default_config(kind, **overrides):
    """Baseline config for an experiment kind, with field overrides applied."""
    if kind not in _KIND_DEFAULTS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of "
                          f"{sorted(_KIND_DEFAULTS)}")
    cfg = ExperimentConfig(kind=kind, **_KIND_DEFAULTS[kind])
    if overrides:
        names = {f.name for f in dataclasses.fields(ExperimentConfig)}
        unknown = sorted(set(overrides) - names)
        if unknown:
            raise ConfigError(f"unknown config fields {unknown}")
        cfg = dataclasses.replace(cfg, **overrides)
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    """Check field ranges and per-kind completeness."""
    if cfg.kind not in experiments.KINDS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    if cfg.n < 4:
        raise ConfigError(f"n must be at least 4, got {cfg.n}")
    if cfg.replicates < 1:
        raise ConfigError(f"replicates must be at least 1, got {cfg.replicates}")
    if not 0.0 < cfg.alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {cfg.alpha}")
    if cfg.eta <= 0.0:
        raise ConfigError(f"eta must be positive, got {cfg.eta}")
    if not 0 <= cfg.vertex < cfg.n:
        raise ConfigError(f"vertex {cfg.vertex} out of range for n={cfg.n}")
    if cfg.n_pos < 0 or cfg.n_neg < 0 or cfg.n_pos + cfg.n_neg < 1:
        raise ConfigError(f"invalid rank split ({cfg.n_pos}, {cfg.n_neg})")
    if cfg.alt_count < 0:
        raise ConfigError(f"alt_count must be nonnegative, got {cfg.alt_count}")
    if cfg.workers < 0:
        raise ConfigError(f"workers must be nonnegative, got {cfg.workers}")
    for name in _REQUIRED_FIELDS[cfg.kind]:
        if getattr(cfg, name) is None:
            raise ConfigError(f"{cfg.kind} requires the {name} field")
    if cfg.n_pure is not None and cfg.kind in ("mmsbmPure", "lpTestPower", "lpTestSize"):
        if 2 * cfg.n_pure > cfg.n:
            raise ConfigError(f"2 * n_pure = {2 * cfg.n_pure} exceeds n = {cfg.n}")
        if not 0.0 < cfg.t_min <= cfg.t_max < 1.0:
            raise ConfigError(
                f"mixing bounds must satisfy 0 < t_min <= t_max < 1, got "
                f"({cfg.t_min}, {cfg.t_max})"
            )
    rho = experiments.resolve_rho(cfg)
    if not 0.0 < rho <= 1.0:
        raise ConfigError(f"resolved sparsity factor {rho:.6g} outside (0, 1]")


def resolve_workers(cfg, workers=None):
    """Effective worker count: explicit arg, then config, then environment, then 1."""
    for candidate in (workers, cfg.workers if cfg.workers else None):
        if candidate:
            return max(1, int(candidate))
    env = os.environ.get(WORKERS_ENV, "").strip()
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
        if value > 0:
            return value
    return 1


@dataclass(eq=False)
class SummaryStats:
    """Moments and the five-number summary of one tracked quantity."""

    name: str
    count: int
    mean: float
    sd: float
    min: float
    q1: float
    median: float
    q3: float
    max: float


@dataclass(eq=False)
class KsEntry:
    """KS distance of a tracked quantity from its normal reference."""

    name: str
    ks: float
    target_mean: float
    target_sd: float
    count: int


@dataclass(eq=False)
class McReport:
    """Everything a finished experiment produced."""

    cfg: ExperimentConfig
    records: list
    failures: list
    summary: dict
    ks_distances: dict
    power_rows: list | None
    mse_rows: list | None
    runtime: float


def _replicate_task(args):
    cfg, r = args
    try:
        return r, "ok", experiments.run_replicate(cfg, r)
    except Exception as exc:
        return r, "err", (type(exc).__name__, str(exc))


def _summarize(name, values):
    arr = np.asarray(values, dtype=np.float64)
    q = np.quantile(arr, [0.0, 0.25, 0.5, 0.75, 1.0])
    sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return SummaryStats(name=name, count=int(arr.size), mean=float(arr.mean()),
                        sd=sd, min=float(q[0]), q1=float(q[1]), median=float(q[2]),
                        q3=float(q[3]), max=float(q[4]))


def ks_against_normal(samples, mean, sd):
    """KS distance between the sample and a normal law with the given moments.

    Raises:
        DomainError: if sd is not positive or fewer than 20 samples arrive.
    """
    arr = np.sort(np.asarray(samples, dtype=np.float64))
    if arr.size < _KS_MIN_SAMPLES:
        raise DomainError(f"need at least {_KS_MIN_SAMPLES} samples, got {arr.size}")
    if sd <= 0.0:
        raise DomainError(f"reference sd must be positive, got {sd}")
    cdf = 0.5 * (1.0 + erf((arr - mean) / (sd * math.sqrt(2.0))))
    m = arr.size
    upper = np.max(np.arange(1, m + 1) / m - cdf)
    lower = np.max(cdf - np.arange(0, m) / m)
    return float(max(upper, lower))


def _collect_values(records, name):
    return [rec[name] for _, rec in records if name in rec]


def run_experiment(cfg, workers=None):
    """Run all replicates, aggregate records, and attach reference distances.

    Replicates run serially or on a process pool, always aggregated in
    replicate order.  A failed replicate is recorded, not raised; more than
    1% failures abort the run.

    Raises:
        ConfigError: if the config is invalid.
        DegenerateError: if more than 1% of replicates fail.
    """
    validate_config(cfg)
    t0 = time.perf_counter()
    n_workers = resolve_workers(cfg, workers)
    tasks = [(cfg, r) for r in range(cfg.replicates)]
    if n_workers == 1:
        outcomes = [_replicate_task(task) for task in tasks]
    else:
        chunk = max(1, cfg.replicates // (n_workers * 8))
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(_replicate_task, tasks, chunksize=chunk))
    records = []
    failures = []
    for r, status, payload in outcomes:
        if status == "ok":
            records.append((r, payload))
        else:
            failures.append((r, payload[0], payload[1]))
    if len(failures) > _FAIL_FRACTION * cfg.replicates:
        first = failures[0]
        raise DegenerateError(
            f"{len(failures)} of {cfg.replicates} replicates failed "
            f"(first: replicate {first[0]}, {first[1]}: {first[2]})"
        )
    names = sorted({name for _, rec in records for name in rec})
    summary = {}
    for name in names:
        summary[name] = _summarize(name, _collect_values(records, name))
    ctx = experiments.context_for(cfg)
    ks_distances = {}
    for name, (t_mean, t_sd) in experiments.targets(cfg, ctx).items():
        stats = summary.get(name)
        if stats is None or stats.count < _KS_MIN_SAMPLES or t_sd <= 0.0:
            continue
        ks = ks_against_normal(_collect_values(records, name), t_mean, t_sd)
        ks_distances[name] = KsEntry(name=name, ks=ks, target_mean=t_mean,
                                     target_sd=t_sd, count=stats.count)
    power_rows = _power_rows(cfg, ctx, summary) if cfg.kind == "lpTestPower" else None
    mse_rows = _mse_rows(cfg, records, summary) if cfg.kind == "mmsbmPure" else None
    runtime = time.perf_counter() - t0
    return McReport(cfg=cfg, records=records, failures=failures, summary=summary,
                    ks_distances=ks_distances, power_rows=power_rows,
                    mse_rows=mse_rows, runtime=runtime)


def _power_rows(cfg, ctx, summary):
    rows = []
    for m, distance in enumerate(ctx["alt_distances"]):
        ase = summary.get(f"reject_ase_alt{m}")
        ose = summary.get(f"reject_ose_alt{m}")
        if ase is None or ose is None:
            continue
        rows.append({"distance": distance, "power_ase": ase.mean,
                     "power_ose": ose.mean})
    rows.sort(key=lambda row: row["distance"])
    return rows


def _mse_rows(cfg, records, summary):
    rows = []
    d = 2
    for label in range(d):
        ase_stats = summary.get(f"sqerr_ase_l{label}")
        ose_stats = summary.get(f"sqerr_ose_l{label}")
        if ase_stats is None or ose_stats is None:
            continue
        trace_ase = 0.0
        trace_ose = 0.0
        for c in range(d):
            ase_vals = _collect_values(records, f"ase_l{label}_c{c}")
            ose_vals = _collect_values(records, f"ose_l{label}_c{c}")
            if len(ase_vals) > 1:
                trace_ase += float(np.var(ase_vals, ddof=1))
            if len(ose_vals) > 1:
                trace_ose += float(np.var(ose_vals, ddof=1))
        rows.append({
            "community": label,
            "mse_ase": ase_stats.mean,
            "mse_ose": ose_stats.mean,
            "trace_cov_ase": trace_ase,
            "trace_cov_ose": trace_ose,
            "count": ase_stats.count,
        })
    return rows


def power_table(cfg, report=None):
    """Rows (distance, power_ase, power_ose) for a power experiment."""
    if cfg.kind != "lpTestPower":
        raise ConfigError(f"power tables need kind lpTestPower, got {cfg.kind!r}")
    if report is None:
        report = run_experiment(cfg)
    return report.power_rows


def mse_table(cfg, report=None):
    """Per-community MSE and covariance-trace rows for a pure-node experiment."""
    if cfg.kind != "mmsbmPure":
        raise ConfigError(f"MSE tables need kind mmsbmPure, got {cfg.kind!r}")
    if report is None:
        report = run_experiment(cfg)
    return report.mse_rows


def _fmt(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
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


def emit_report(report, outdir):
    """Write the report as CSV files plus a text summary under outdir.

    Emits summary.csv, ks.csv, failures.csv, one file per tracked quantity
    under quantities/, the power or MSE table when applicable, histogram bins
    when configured, and summary.txt.  Files are written whole then renamed,
    and identical reports produce identical bytes.
    """
    os.makedirs(outdir, exist_ok=True)
    names = sorted(report.summary)
    _write_csv(
        os.path.join(outdir, "summary.csv"),
        ["name", "count", "mean", "sd", "min", "q1", "median", "q3", "max"],
        [[s.name, _fmt(s.count), _fmt(s.mean), _fmt(s.sd), _fmt(s.min),
          _fmt(s.q1), _fmt(s.median), _fmt(s.q3), _fmt(s.max)]
         for s in (report.summary[name] for name in names)],
    )
    _write_csv(
        os.path.join(outdir, "ks.csv"),
        ["name", "ks", "target_mean", "target_sd", "count"],
        [[e.name, _fmt(e.ks), _fmt(e.target_mean), _fmt(e.target_sd), _fmt(e.count)]
         for e in (report.ks_distances[k] for k in sorted(report.ks_distances))],
    )
    _write_csv(
        os.path.join(outdir, "failures.csv"),
        ["replicate", "error", "message"],
        [[str(r), err, msg] for r, err, msg in report.failures],
    )
    qdir = os.path.join(outdir, "quantities")
    os.makedirs(qdir, exist_ok=True)
    for name in names:
        _write_csv(
            os.path.join(qdir, f"{name}.csv"),
            ["replicate", "value"],
            [[str(r), _fmt(rec[name])] for r, rec in report.records if name in rec],
        )
    if report.power_rows is not None:
        _write_csv(
            os.path.join(outdir, "power_table.csv"),
            ["distance", "power_ase", "power_ose"],
            [[_fmt(row["distance"]), _fmt(row["power_ase"]), _fmt(row["power_ose"])]
             for row in report.power_rows],
        )
    if report.mse_rows is not None:
        _write_csv(
            os.path.join(outdir, "mse_table.csv"),
            ["community", "mse_ase", "mse_ose", "trace_cov_ase", "trace_cov_ose",
             "count"],
            [[_fmt(row["community"]), _fmt(row["mse_ase"]), _fmt(row["mse_ose"]),
              _fmt(row["trace_cov_ase"]), _fmt(row["trace_cov_ose"]),
              _fmt(row["count"])] for row in report.mse_rows],
        )
    if report.cfg.emit_histograms:
        hdir = os.path.join(outdir, "hist")
        os.makedirs(hdir, exist_ok=True)
        for name in names:
            values = np.asarray(_collect_values(report.records, name))
            counts, edges = np.histogram(values, bins=40)
            _write_csv(
                os.path.join(hdir, f"{name}.csv"),
                ["bin_left", "bin_right", "count"],
                [[_fmt(edges[k]), _fmt(edges[k + 1]), str(int(counts[k]))]
                 for k in range(counts.size)],
            )
    _atomic_write(os.path.join(outdir, "summary.txt"), _render_text(report))


def _render_text(report):
    cfg = report.cfg
    lines = [
        f"experiment: {cfg.kind}",
        f"n: {cfg.n}",
        f"replicates: {cfg.replicates}",
        f"base_seed: {cfg.base_seed}",
        f"succeeded: {len(report.records)}",
        f"failed: {len(report.failures)}",
        "",
        "quantities:",
    ]
    for name in sorted(report.summary):
        s = report.summary[name]
        lines.append(
            f"  {name}: mean={s.mean:.6g} sd={s.sd:.6g} "
            f"median={s.median:.6g} n={s.count}"
        )
    if report.ks_distances:
        lines.append("")
        lines.append("ks distances vs normal reference:")
        for name in sorted(report.ks_distances):
            e = report.ks_distances[name]
            lines.append(
                f"  {name}: ks={e.ks:.6g} target=N({e.target_mean:.6g}, "
                f"{e.target_sd:.6g}^2)"
            )
    if report.power_rows:
        lines.append("")
        lines.append("power by alternative (distance, ase, ose):")
        for row in report.power_rows:
            lines.append(
                f"  {row['distance']:.6g}: {row['power_ase']:.6g} "
                f"{row['power_ose']:.6g}"
            )
    if report.mse_rows:
        lines.append("")
        lines.append("pure-node tables (community, mse_ase, mse_ose, "
                     "trace_ase, trace_ose):")
        for row in report.mse_rows:
            lines.append(
                f"  {row['community']}: {row['mse_ase']:.6g} {row['mse_ose']:.6g} "
                f"{row['trace_cov_ase']:.6g} {row['trace_cov_ose']:.6g}"
            )
    lines.append("")
    return "\n".join(lines)
