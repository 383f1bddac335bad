"""Trajectory and logistic-coefficient evaluation against generating truth."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import DataError

__all__ = ["MetricsReport", "arse", "match_labels", "abias_vbias", "logistic_rmse"]

MAX_EXHAUSTIVE_G = 6


@dataclass(frozen=True)
class MetricsReport:
    """Replicate-aggregated evaluation summary.

    Trajectory rows are indexed by truth component; rmse is indexed by
    non-reference contrast and coefficient.  permutations records, per
    replicate, which estimated component was matched to each truth
    component.
    """

    arse_mean: np.ndarray      # (G,)
    arse_sd: np.ndarray        # (G,)
    abias_mean: np.ndarray     # (G,)
    abias_sd: np.ndarray       # (G,)
    vbias_mean: np.ndarray     # (G,)
    vbias_sd: np.ndarray       # (G,)
    rmse: np.ndarray           # (G-1, P+1)
    permutations: np.ndarray   # (R, G)


def _check_pair(truth, estimate) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(truth, dtype=float)
    e = np.asarray(estimate, dtype=float)
    if t.shape != e.shape:
        raise DataError(f"shape mismatch: truth {t.shape} vs estimate {e.shape}")
    return t, e


def arse(truth, estimate, g: int) -> float:
    """Root-mean-square trajectory error for one component, over (K, n)."""
    t, e = _check_pair(truth, estimate)
    d = e[g] - t[g]
    return float(np.sqrt(np.mean(d * d)))


def match_labels(truth, estimate) -> tuple:
    """Match estimated components to truth components by total ARSE.

    Returns perm with estimate[perm[g]] assigned to truth component g;
    exhaustive search over all G! assignments.
    """
    t, e = _check_pair(truth, estimate)
    G = t.shape[0]
    if G > MAX_EXHAUSTIVE_G:
        raise DataError(f"exhaustive matching supports G <= {MAX_EXHAUSTIVE_G}, got {G}")
    diff = t[:, None] - e[None, :]
    cost = np.sqrt(np.mean(diff * diff, axis=tuple(range(2, diff.ndim))))
    best, best_total = None, np.inf
    for perm in permutations(range(G)):
        total = cost[range(G), perm].sum()
        if total < best_total:
            best, best_total = perm, total
    return best


def abias_vbias(truth, estimate, g: int) -> tuple[float, float]:
    """Mean bias and sample variance of pointwise biases for one component."""
    t, e = _check_pair(truth, estimate)
    bias = (e[g] - t[g]).ravel()
    return float(bias.mean()), float(bias.var(ddof=1))


def logistic_rmse(truth_deltas, estimates) -> np.ndarray:
    """RMSE of logistic coefficients over replicates.

    truth_deltas: (G, P+1) with zero reference row; estimates: (R, G, P+1)
    already label-matched to truth order.  Returns (G-1, P+1) covering the
    non-reference contrasts.
    """
    t = np.asarray(truth_deltas, dtype=float)
    e = np.asarray(estimates, dtype=float)
    if e.ndim != 3 or e.shape[1:] != t.shape:
        raise DataError(
            f"estimates must be (R, {t.shape[0]}, {t.shape[1]}), got {e.shape}")
    err = e[:, :-1, :] - t[None, :-1, :]
    return np.sqrt(np.mean(err * err, axis=0))
