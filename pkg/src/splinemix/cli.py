"""Command-line interface: simulate, fit, select, evaluate.

Configs are flat `key = value` text files; unknown keys are rejected.
Data travels as long-format CSV (`subject,entry,time,value`) with a
companion covariate table, floats serialized at 17 significant digits so
files round-trip bit-exactly.  Every command writes a run manifest next to
its outputs.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .basis import TimeGrid, build_basis, rescale_times
from .errors import ConfigError, DataError, SplinemixError
from .gibbs import FitConfig, run_chain
from .metrics import MetricsReport, abias_vbias, arse, logistic_rmse, match_labels
from .model import Dataset, Hyperparams, standardize_covariates
from .postproc import build_dic_report, compute_dic, relabel_ecr, summarize
from .simulate import DEFAULT_TAU_SQ_B, generate_scenario, scenario_a, scenario_b

__all__ = ["main"]

VERSION = __version__


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

def parse_config(path) -> dict:
    """Read a flat key=value config; '#' starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _take(cfg: dict, key: str, cast, default):
    if key not in cfg:
        return default
    raw = cfg.pop(key)
    try:
        if cast is bool:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from exc


def _reject_extras(cfg: dict, path):
    if cfg:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(sorted(cfg))}")


_HYPER_KEYS = ("sigma_alpha_sq", "nu_sigma", "A_sigma", "nu_tau", "A_tau",
               "nu_kappa", "A_kappa", "sigma_delta_sq")


def load_fit_config(path, seed_override=None) -> tuple[FitConfig, bool]:
    """Build a FitConfig (plus the standardize flag) from a config file."""
    cfg = parse_config(path)
    hyper_kwargs = {}
    defaults = Hyperparams()
    for key in _HYPER_KEYS:
        val = _take(cfg, key, float, None)
        if val is not None:
            hyper_kwargs[key] = val
    try:
        hyper = Hyperparams(**hyper_kwargs) if hyper_kwargs else defaults
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    kwargs = dict(
        G=_take(cfg, "G", int, None),
        m=_take(cfg, "m", int, 10),
        iterations=_take(cfg, "iterations", int, 20000),
        burn_in=_take(cfg, "burn_in", int, 4000),
        thin=_take(cfg, "thin", int, 1),
        seed=_take(cfg, "seed", int, 0),
        init=_take(cfg, "init", str, "kmeans"),
        hyper=hyper)
    standardize = _take(cfg, "standardize", bool, False)
    _reject_extras(cfg, path)
    if kwargs["G"] is None:
        raise ConfigError(f"{path}: missing required key 'G'")
    if seed_override is not None:
        kwargs["seed"] = seed_override
    return FitConfig(**kwargs), standardize


def load_scenario_config(path, seed_override=None):
    """Build a ScenarioSpec plus replicate count from a config file."""
    cfg = parse_config(path)
    name = _take(cfg, "scenario", str, None)
    if name not in ("A", "B"):
        raise ConfigError(f"{path}: scenario must be 'A' or 'B', got {name!r}")
    replicates = _take(cfg, "replicates", int, 1)
    if replicates < 0:
        raise ConfigError(f"replicates must be >= 0, got {replicates}")
    kwargs = dict(
        N=_take(cfg, "N", int, 150),
        n=_take(cfg, "n", int, 50),
        m=_take(cfg, "m", int, 10),
        seed=_take(cfg, "seed", int, 0))
    if seed_override is not None:
        kwargs["seed"] = seed_override
    if name == "B":
        kwargs["tau_sq"] = _take(cfg, "tau_sq", float, DEFAULT_TAU_SQ_B)
    _reject_extras(cfg, path)
    spec = scenario_a(**kwargs) if name == "A" else scenario_b(**kwargs)
    return spec, replicates


# ---------------------------------------------------------------------------
# Dataset files
# ---------------------------------------------------------------------------

def write_dataset(dataset: Dataset, data_path, cov_path):
    """Write the long-format data file and the covariate table."""
    times = dataset.grid.times
    with open(data_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["subject", "entry", "time", "value"])
        for i in range(dataset.N):
            for k in range(dataset.K):
                for j in range(dataset.n):
                    w.writerow([i + 1, k + 1, _fmt(times[j]), _fmt(dataset.y[i, k, j])])
    with open(cov_path, "w", newline="") as fh:
        w = csv.writer(fh)
        P = dataset.P
        w.writerow(["subject"] + [f"x{p}" for p in range(1, P + 1)])
        for i in range(dataset.N):
            w.writerow([i + 1] + [_fmt(v) for v in dataset.covariates[i, 1:]])


def read_long_data(path):
    """Parse the long data format into (subjects, entries, times, y)."""
    subjects, entries = [], []
    series = {}
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read data file {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["subject", "entry", "time", "value"]:
            raise DataError(
                f"{path}: expected header 'subject,entry,time,value', got {header}")
        for rowno, row in enumerate(reader, 2):
            if len(row) != 4:
                raise DataError(f"{path}:{rowno}: expected 4 fields, got {len(row)}")
            subj, entry = row[0].strip(), row[1].strip()
            try:
                t, v = float(row[2]), float(row[3])
            except ValueError as exc:
                raise DataError(f"{path}:{rowno}: non-numeric time/value") from exc
            if not (np.isfinite(t) and np.isfinite(v)):
                raise DataError(f"{path}:{rowno}: non-finite time/value")
            if subj not in series:
                series[subj] = {}
                subjects.append(subj)
            if entry not in series[subj]:
                series[subj][entry] = ([], [])
                if entry not in entries:
                    entries.append(entry)
            ts, vs = series[subj][entry]
            ts.append(t)
            vs.append(v)
    if not subjects:
        raise DataError(f"{path}: no data rows")
    ref_times = None
    for subj in subjects:
        for entry in entries:
            if entry not in series[subj]:
                raise DataError(f"{path}: subject {subj} is missing entry {entry}")
            ts = np.asarray(series[subj][entry][0])
            if ref_times is None:
                ref_times = ts
            elif ts.shape != ref_times.shape or not np.array_equal(ts, ref_times):
                raise DataError(
                    f"{path}: subject {subj} entry {entry} has a different time "
                    f"grid than subject {subjects[0]} entry {entries[0]}")
    y = np.empty((len(subjects), len(entries), ref_times.size))
    for i, subj in enumerate(subjects):
        for k, entry in enumerate(entries):
            y[i, k] = series[subj][entry][1]
    return subjects, entries, ref_times, y


def read_covariates(path, subjects):
    """Parse the covariate table, reordered to the data's subject order."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read covariate file {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip() != "subject" or len(header) < 2:
            raise DataError(f"{path}: expected header 'subject,<name>,...', got {header}")
        names = [h.strip() for h in header[1:]]
        rows = {}
        for rowno, row in enumerate(reader, 2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{rowno}: expected {len(header)} fields, got {len(row)}")
            subj = row[0].strip()
            if subj in rows:
                raise DataError(f"{path}:{rowno}: duplicate subject {subj}")
            try:
                rows[subj] = [float(x) for x in row[1:]]
            except ValueError as exc:
                raise DataError(f"{path}:{rowno}: non-numeric covariate") from exc
    missing = [s for s in subjects if s not in rows]
    if missing:
        raise DataError(f"{path}: no covariates for subjects {missing[:5]}")
    extra = [s for s in rows if s not in set(subjects)]
    if extra:
        raise DataError(f"{path}: covariates for unknown subjects {extra[:5]}")
    mat = np.array([rows[s] for s in subjects])
    if not np.all(np.isfinite(mat)):
        raise DataError(f"{path}: non-finite covariate values")
    return names, mat


def load_dataset(data_path, cov_path, standardize: bool = False) -> Dataset:
    subjects, _, times, y = read_long_data(data_path)
    _, cov = read_covariates(cov_path, subjects)
    grid = rescale_times(times)
    dataset = Dataset(y=y, covariates=np.hstack([np.ones((len(subjects), 1)), cov]),
                      grid=grid)
    return standardize_covariates(dataset) if standardize else dataset


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

def write_manifest(out_dir: Path, command: str, config: dict, seed, outputs, started):
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": VERSION,
        "duration_s": round(time.time() - started, 3),
        "outputs": sorted(str(p) for p in outputs),
    }
    path = out_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _spec_snapshot(spec) -> dict:
    return {
        "scenario": spec.name, "G": spec.G, "K": spec.K, "N": spec.N,
        "n": spec.n, "m": spec.m, "seed": spec.seed,
        "alpha0": spec.alpha0.tolist(), "alpha1": spec.alpha1.tolist(),
        "sigma_sq": spec.sigma_sq.tolist(), "tau_sq": spec.tau_sq.tolist(),
        "delta": spec.delta.tolist(), "kappa_sq": spec.kappa_sq,
        "cov_means": spec.cov_means.tolist(),
    }


def _simulate_one(spec, rep: int, out_dir: str, pad: int):
    dataset, truth = generate_scenario(spec, stream_id=rep)
    out = Path(out_dir)
    data_path = out / f"rep{rep:0{pad}d}_data.csv"
    cov_path = out / f"rep{rep:0{pad}d}_covariates.csv"
    write_dataset(dataset, data_path, cov_path)
    record = {
        "replicate": rep,
        "mu": truth.mu.tolist(),
        "beta": truth.beta.tolist(),
        "weights": truth.weights.tolist(),
        "labels": truth.labels.tolist(),
        "zeta": truth.zeta.tolist(),
    }
    return data_path.name, cov_path.name, record


def cmd_simulate(args) -> None:
    started = time.time()
    spec, replicates = load_scenario_config(args.config, args.seed)
    out = _out_dir(args)
    pad = max(3, len(str(max(replicates - 1, 0))))
    outputs = []
    records = [None] * replicates
    if args.workers > 1 and replicates > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_simulate_one, [spec] * replicates,
                                    range(replicates), [str(out)] * replicates,
                                    [pad] * replicates))
    else:
        results = [_simulate_one(spec, rep, str(out), pad) for rep in range(replicates)]
    for rep, (data_name, cov_name, record) in enumerate(results):
        outputs += [data_name, cov_name]
        records[rep] = record
    truth_path = out / "truth.json"
    with open(truth_path, "w") as fh:
        json.dump({"spec": _spec_snapshot(spec), "replicates": records},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(truth_path.name)
    write_manifest(out, "simulate", _spec_snapshot(spec) | {"replicates": replicates},
                   spec.seed, outputs, started)


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _config_snapshot(config: FitConfig, standardize: bool) -> dict:
    h = config.hyper
    return {
        "G": config.G, "m": config.m, "iterations": config.iterations,
        "burn_in": config.burn_in, "thin": config.thin, "seed": config.seed,
        "init": config.init, "standardize": standardize,
        "hyper": {k: getattr(h, k) for k in _HYPER_KEYS},
    }


def _write_summary_files(out: Path, report, grid_times) -> list:
    traj_path = out / "trajectories.csv"
    G, K, n = report.traj_mean.shape
    with open(traj_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "entry", "time", "mean", "lower", "upper"])
        for g in range(G):
            for k in range(K):
                for j in range(n):
                    w.writerow([g + 1, k + 1, _fmt(grid_times[j]),
                                _fmt(report.traj_mean[g, k, j]),
                                _fmt(report.traj_lower[g, k, j]),
                                _fmt(report.traj_upper[g, k, j])])
    logi_path = out / "logistic.csv"
    with open(logi_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "coefficient", "mean", "lower", "upper"])
        for g in range(report.delta_mean.shape[0]):
            for p in range(report.delta_mean.shape[1]):
                w.writerow([g + 1, f"delta{p}", _fmt(report.delta_mean[g, p]),
                            _fmt(report.delta_lower[g, p]),
                            _fmt(report.delta_upper[g, p])])
    alloc_path = out / "allocations.csv"
    with open(alloc_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["subject", "component", "frequency"])
        N = report.alloc_freq.shape[0]
        for i in range(N):
            for g in range(G):
                w.writerow([i + 1, g + 1, _fmt(report.alloc_freq[i, g])])
    return [traj_path.name, logi_path.name, alloc_path.name]


def cmd_fit(args) -> None:
    started = time.time()
    config, standardize = load_fit_config(args.config, args.seed)
    dataset = load_dataset(args.data, args.covariates, standardize)
    out = _out_dir(args)
    samples = run_chain(dataset, config)
    samples_path = out / "samples.npz"
    samples.to_npz(samples_path)
    relabeled, _ = relabel_ecr(samples)
    basis = build_basis(dataset.grid, config.m)
    report = summarize(relabeled, basis)
    outputs = [samples_path.name]
    outputs += _write_summary_files(out, report, dataset.grid.times)
    write_manifest(out, "fit", _config_snapshot(config, standardize),
                   config.seed, outputs, started)


# ---------------------------------------------------------------------------
# select
# ---------------------------------------------------------------------------

def parse_g_range(text: str):
    """Accept '2', '1,2,3', or 'a:b' (inclusive)."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi = text.split(":")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty range {text!r}")
            values = list(range(lo, hi + 1))
        else:
            values = [int(p) for p in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --g-range {text!r}: {exc}") from exc
    if not values or any(g < 1 for g in values) or len(set(values)) != len(values):
        raise ConfigError(f"bad --g-range {text!r}: need distinct G >= 1")
    return values


def _select_one(y, covariates, times, config_kwargs, hyper_kwargs, G):
    dataset = Dataset(y=y, covariates=covariates, grid=TimeGrid(times))
    config = FitConfig(G=G, hyper=Hyperparams(**hyper_kwargs), **config_kwargs)
    samples = run_chain(dataset, config, stream_id=G)
    return (G,) + compute_dic(samples)


def cmd_select(args) -> None:
    started = time.time()
    config, standardize = load_fit_config(args.config, args.seed)
    g_values = parse_g_range(args.g_range)
    dataset = load_dataset(args.data, args.covariates, standardize)
    out = _out_dir(args)
    h = config.hyper
    config_kwargs = dict(m=config.m, iterations=config.iterations,
                         burn_in=config.burn_in, thin=config.thin,
                         seed=config.seed, init=config.init)
    hyper_kwargs = {k: getattr(h, k) for k in _HYPER_KEYS}
    common = (dataset.y, dataset.covariates, dataset.grid.times,
              config_kwargs, hyper_kwargs)
    if args.workers > 1 and len(g_values) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(_select_one, *common, G) for G in g_values]
            entries = [f.result() for f in futures]
    else:
        entries = [_select_one(*common, G) for G in g_values]
    report = build_dic_report(entries)
    dic_path = out / "dic.csv"
    with open(dic_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["G", "mean_deviance", "p_v", "dic", "selected"])
        for i, G in enumerate(report.G_values):
            w.writerow([G, _fmt(report.mean_deviance[i]), _fmt(report.p_v[i]),
                        _fmt(report.dic[i]), int(G == report.selected_G)])
    print(f"selected G = {report.selected_G}")
    write_manifest(out, "select",
                   _config_snapshot(config, standardize) | {"g_range": g_values},
                   config.seed, [dic_path.name], started)


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def _read_fit_outputs(fit_dir: Path, G: int, K: int, n: int, P1: int):
    """Posterior-mean trajectories and logistic coefficients from one fit."""
    traj = np.full((G, K, n), np.nan)
    path = fit_dir / "trajectories.csv"
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        next(reader)
        counters = {}
        for row in reader:
            g, k = int(row[0]) - 1, int(row[1]) - 1
            j = counters.get((g, k), 0)
            counters[(g, k)] = j + 1
            traj[g, k, j] = float(row[3])
    if np.any(np.isnan(traj)):
        raise DataError(f"{path}: incomplete trajectory table for shape "
                        f"G={G}, K={K}, n={n}")
    delta = np.full((G, P1), np.nan)
    path = fit_dir / "logistic.csv"
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            g = int(row[0]) - 1
            p = int(row[1].removeprefix("delta"))
            delta[g, p] = float(row[2])
    if np.any(np.isnan(delta)):
        raise DataError(f"{path}: incomplete logistic table for G={G}, P+1={P1}")
    return traj, delta


def evaluate_replicates(truth_path, fits_dir) -> MetricsReport:
    try:
        with open(truth_path) as fh:
            truth = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read truth file {truth_path}: {exc}") from exc
    spec = truth["spec"]
    G, K, n = spec["G"], spec["K"], spec["n"]
    delta_truth = np.asarray(spec["delta"])
    replicates = truth["replicates"]
    if not replicates:
        raise DataError(f"{truth_path}: no replicates recorded")
    fits_dir = Path(fits_dir)
    pad = max(3, len(str(len(replicates) - 1)))
    R = len(replicates)
    arse_v = np.empty((R, G))
    abias_v = np.empty((R, G))
    vbias_v = np.empty((R, G))
    perms = np.empty((R, G), dtype=np.int64)
    deltas = np.empty((R,) + delta_truth.shape)
    for r, record in enumerate(replicates):
        fit_dir = fits_dir / f"rep{r:0{pad}d}"
        if not fit_dir.is_dir():
            raise DataError(f"missing fit directory {fit_dir} for replicate {r}")
        mu_truth = np.asarray(record["mu"])
        est_mu, est_delta = _read_fit_outputs(fit_dir, G, K, n, delta_truth.shape[1])
        perm = match_labels(mu_truth, est_mu)
        perms[r] = perm
        matched = est_mu[list(perm)]
        for g in range(G):
            arse_v[r, g] = arse(mu_truth, matched, g)
            abias_v[r, g], vbias_v[r, g] = abias_vbias(mu_truth, matched, g)
        d = est_delta[list(perm)]
        deltas[r] = d - d[-1]  # restore the zero reference after reordering
    return MetricsReport(
        arse_mean=arse_v.mean(axis=0), arse_sd=arse_v.std(axis=0, ddof=1) if R > 1 else np.zeros(G),
        abias_mean=abias_v.mean(axis=0), abias_sd=abias_v.std(axis=0, ddof=1) if R > 1 else np.zeros(G),
        vbias_mean=vbias_v.mean(axis=0), vbias_sd=vbias_v.std(axis=0, ddof=1) if R > 1 else np.zeros(G),
        rmse=logistic_rmse(delta_truth, deltas), permutations=perms)


def cmd_evaluate(args) -> None:
    started = time.time()
    report = evaluate_replicates(args.truth, args.fits)
    out = _out_dir(args)
    G = report.arse_mean.size
    traj_path = out / "metrics_trajectories.csv"
    with open(traj_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "arse_mean", "arse_sd", "abias_mean", "abias_sd",
                    "vbias_mean", "vbias_sd"])
        for g in range(G):
            w.writerow([g + 1] + [_fmt(v) for v in
                        (report.arse_mean[g], report.arse_sd[g], report.abias_mean[g],
                         report.abias_sd[g], report.vbias_mean[g], report.vbias_sd[g])])
    logi_path = out / "metrics_logistic.csv"
    with open(logi_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "coefficient", "rmse"])
        for g in range(report.rmse.shape[0]):
            for p in range(report.rmse.shape[1]):
                w.writerow([g + 1, f"delta{p}", _fmt(report.rmse[g, p])])
    metrics_path = out / "metrics.json"
    with open(metrics_path, "w") as fh:
        json.dump({
            "arse_mean": report.arse_mean.tolist(),
            "arse_sd": report.arse_sd.tolist(),
            "abias_mean": report.abias_mean.tolist(),
            "abias_sd": report.abias_sd.tolist(),
            "vbias_mean": report.vbias_mean.tolist(),
            "vbias_sd": report.vbias_sd.tolist(),
            "rmse": report.rmse.tolist(),
            "permutations": report.permutations.tolist(),
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(out, "evaluate", {"truth": str(args.truth), "fits": str(args.fits)},
                   None, [traj_path.name, logi_path.name, metrics_path.name], started)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splinemix",
        description="Covariate-guided Bayesian spline-mixture clustering of "
                    "replicated multivariate time series.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic benchmark replicates")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="run one chain on a dataset and summarize")
    p.add_argument("--data", required=True)
    p.add_argument("--covariates", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="fit a range of component counts and pick by DIC")
    p.add_argument("--data", required=True)
    p.add_argument("--covariates", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--g-range", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="score fit outputs against generating truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--fits", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except SplinemixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
