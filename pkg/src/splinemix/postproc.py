"""Posterior post-processing: DIC, label unswitching, and summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .basis import BasisSet
from .errors import ConfigError
from .gibbs import PosteriorSamples

__all__ = [
    "DicReport",
    "SummaryReport",
    "compute_dic",
    "build_dic_report",
    "relabel_ecr",
    "summarize",
    "DIC_TIE_TOL",
]

MIN_DIC_SWEEPS = 10
# DIC differences below this are treated as ties, resolved toward smaller G.
DIC_TIE_TOL = 1e-9


@dataclass(frozen=True)
class DicReport:
    """DIC table over candidate component counts."""

    G_values: tuple
    mean_deviance: np.ndarray
    p_v: np.ndarray
    dic: np.ndarray
    selected_G: int


@dataclass(frozen=True)
class SummaryReport:
    """Posterior summaries from one (relabeled) chain."""

    traj_mean: np.ndarray    # (G, K, n)
    traj_lower: np.ndarray   # (G, K, n)
    traj_upper: np.ndarray   # (G, K, n)
    delta_mean: np.ndarray   # (G, P+1)
    delta_lower: np.ndarray  # (G, P+1)
    delta_upper: np.ndarray  # (G, P+1)
    alloc_freq: np.ndarray   # (N, G)
    level: float


def compute_dic(samples: PosteriorSamples) -> tuple[float, float, float]:
    """Mean deviance, effective parameters, and their sum.

    The effective-parameter count is twice the sample variance of the
    per-sweep observed-data log likelihoods, which is positive by
    construction.
    """
    ll = samples.log_lik
    if ll.size < MIN_DIC_SWEEPS:
        raise ConfigError(
            f"DIC needs at least {MIN_DIC_SWEEPS} retained sweeps, got {ll.size}")
    mean_dev = -2.0 * float(ll.mean())
    p_v = 2.0 * float(ll.var(ddof=1))
    return mean_dev, p_v, mean_dev + p_v


def build_dic_report(entries) -> DicReport:
    """Assemble a DicReport from (G, mean_deviance, p_v, dic) tuples.

    Selection walks G in ascending order and only moves to a larger G when
    its DIC improves by more than the tie tolerance, so exact ties go to
    the smaller model.
    """
    entries = sorted(entries, key=lambda e: e[0])
    if not entries:
        raise ConfigError("DIC report needs at least one candidate G")
    g_values = tuple(e[0] for e in entries)
    if len(set(g_values)) != len(g_values):
        raise ConfigError(f"duplicate G values in DIC candidates: {g_values}")
    dic = np.array([e[3] for e in entries])
    selected = g_values[0]
    best = dic[0]
    for g, d in zip(g_values[1:], dic[1:]):
        if d < best - DIC_TIE_TOL:
            selected, best = g, d
    return DicReport(
        G_values=g_values,
        mean_deviance=np.array([e[1] for e in entries]),
        p_v=np.array([e[2] for e in entries]),
        dic=dic,
        selected_G=selected)


def _best_permutation(z_sweep: np.ndarray, pivot: np.ndarray, G: int) -> np.ndarray:
    """Permutation p (old label -> new label) maximizing agreement with pivot."""
    counts = np.zeros((G, G))
    np.add.at(counts, (z_sweep, pivot), 1.0)
    _, cols = linear_sum_assignment(-counts)
    return cols


def relabel_ecr(samples: PosteriorSamples, pivot: np.ndarray = None) -> tuple[PosteriorSamples, np.ndarray]:
    """Undo label switching by permuting each sweep toward a pivot allocation.

    For every sweep the permutation maximizing the number of subjects whose
    label agrees with the pivot is found by assignment on the G x G
    agreement matrix; all component-indexed draws are permuted to match.
    The default pivot is the allocation of the sweep with the highest
    observed-data log likelihood.

    The logistic block is re-referenced after permuting: the (new) last
    component's delta and zeta rows are subtracted from all rows, which
    leaves every subject's mixing weights unchanged while restoring the
    zero reference.  Returns the relabeled samples and the (S, G) array of
    applied permutations.
    """
    G = samples.G
    z = samples.z
    if pivot is None:
        pivot = z[int(np.argmax(samples.log_lik))]
    pivot = np.asarray(pivot)
    S = samples.S
    perms = np.empty((S, G), dtype=np.int64)
    out = PosteriorSamples(
        alpha=samples.alpha.copy(), beta=samples.beta.copy(),
        sigma_sq=samples.sigma_sq.copy(), tau_sq=samples.tau_sq.copy(),
        delta=samples.delta.copy(), zeta=samples.zeta.copy(),
        kappa_sq=samples.kappa_sq.copy(), z=samples.z.copy(),
        log_lik=samples.log_lik.copy(), config=samples.config)
    identity = np.arange(G)
    for s in range(S):
        perm = _best_permutation(z[s], pivot, G)
        perms[s] = perm
        if np.array_equal(perm, identity):
            continue
        out.z[s] = perm[z[s]]
        for name in ("alpha", "beta", "sigma_sq", "tau_sq", "delta", "zeta",
                     "kappa_sq"):
            arr = getattr(out, name)
            arr[s, perm] = getattr(samples, name)[s]
        out.delta[s] -= out.delta[s, -1]
        out.zeta[s] -= out.zeta[s, -1]
    return out, perms


def summarize(samples: PosteriorSamples, basis: BasisSet,
              level: float = 0.95) -> SummaryReport:
    """Pointwise trajectory bands, logistic intervals, allocation frequencies."""
    if not 0.0 < level < 1.0:
        raise ConfigError(f"credible level must lie in (0, 1), got {level}")
    lo = 100.0 * (1.0 - level) / 2.0
    hi = 100.0 - lo
    traj = (np.einsum("nj,sgkj->sgkn", basis.X, samples.alpha)
            + np.einsum("nj,sgkj->sgkn", basis.W, samples.beta))
    traj_lo, traj_hi = np.percentile(traj, [lo, hi], axis=0)
    delta_lo, delta_hi = np.percentile(samples.delta, [lo, hi], axis=0)
    S, N = samples.z.shape
    freq = np.zeros((N, samples.G))
    np.add.at(freq, (np.arange(N)[None, :].repeat(S, axis=0), samples.z), 1.0)
    freq /= S
    return SummaryReport(
        traj_mean=traj.mean(axis=0), traj_lower=traj_lo, traj_upper=traj_hi,
        delta_mean=samples.delta.mean(axis=0), delta_lower=delta_lo,
        delta_upper=delta_hi, alloc_freq=freq, level=level)
