"""Smoothing-spline kernel and the shared low-rank design matrices.

The nonparametric part of every component trajectory lives in the span of
the top eigen-directions of the spline kernel matrix evaluated on the
common time grid.  This module builds that kernel, its spectral
decomposition, and the two design matrices used everywhere else:

* ``X``: n x 2, a column of ones and the time grid (intercept and slope);
* ``W``: n x m, the leading m eigenvectors of the kernel scaled by the
  square roots of their eigenvalues, so that ``W @ W.T`` is the best
  rank-m approximation of the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, NumericalError

__all__ = ["TimeGrid", "BasisSet", "build_phi", "build_basis", "rescale_times"]

# eigenvalues with magnitude below this are treated as exact zeros
EIG_CLAMP = 1e-10


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing observation times in [0, 1], common to all series."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if t.ndim != 1 or t.size < 3:
            raise DataError(f"time grid needs at least 3 points, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise DataError("time grid contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise DataError("time grid must be strictly increasing")
        if t[0] < 0.0 or t[-1] > 1.0:
            raise DataError(f"time grid must lie in [0, 1], spans [{t[0]}, {t[-1]}]")

    @property
    def n(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class BasisSet:
    """Design matrices and spectrum shared by all subjects and entries."""

    X: np.ndarray          # n x 2: ones, times
    W: np.ndarray          # n x m: scaled eigenvectors
    eigenvalues: np.ndarray  # all n, descending, clamped at zero
    m: int
    grid: TimeGrid = field(repr=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def S(self) -> np.ndarray:
        """Stacked design [X W], n x (2 + m)."""
        return np.hstack([self.X, self.W])


def build_phi(grid: TimeGrid) -> np.ndarray:
    """Spline kernel matrix on the grid.

    Entry (r, h) is ``0.5 * a**2 * (b - a / 3)`` where a = min(t_r, t_h)
    and b = max(t_r, t_h); symmetric positive-semidefinite by construction.
    """
    t = grid.times
    lo = np.minimum.outer(t, t)
    hi = np.maximum.outer(t, t)
    return 0.5 * lo * lo * (hi - lo / 3.0)


def build_basis(grid: TimeGrid, m: int) -> BasisSet:
    """Spectral decomposition of the kernel, truncated to m directions.

    Eigenvalues are sorted descending and clamped to zero below
    ``EIG_CLAMP``; directions with clamped eigenvalues are excluded even if
    m asks for them.  Each eigenvector's sign is fixed so its
    largest-magnitude entry is positive, making W reproducible across
    platforms.
    """
    n = grid.n
    if not (1 <= m < n):
        raise ConfigError(f"basis count m must satisfy 1 <= m < n = {n}, got {m}")
    phi = build_phi(grid)
    try:
        eigvals, eigvecs = np.linalg.eigh(phi)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition of the spline kernel failed "
            f"(n={n}, fro norm={np.linalg.norm(phi):.3e})") from exc
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    if eigvals[-1] < -EIG_CLAMP:
        raise NumericalError(
            f"spline kernel unexpectedly indefinite: min eigenvalue {eigvals[-1]:.3e}")
    eigvals = np.where(eigvals < EIG_CLAMP, 0.0, eigvals)

    # sign convention: largest-magnitude entry of each eigenvector positive
    pivot = np.argmax(np.abs(eigvecs), axis=0)
    signs = np.sign(eigvecs[pivot, np.arange(n)])
    signs[signs == 0] = 1.0
    eigvecs = eigvecs * signs

    m_eff = min(m, int(np.count_nonzero(eigvals)))
    W = eigvecs[:, :m_eff] * np.sqrt(eigvals[:m_eff])
    X = np.column_stack([np.ones(n), grid.times])
    return BasisSet(X=X, W=W, eigenvalues=eigvals, m=m_eff, grid=grid)


def rescale_times(raw_times) -> TimeGrid:
    """Affine map of raw observation times onto [0, 1].

    Endpoints land exactly on 0 and 1.  Duplicate or decreasing times are
    a data error, never silently fixed.
    """
    t = np.asarray(raw_times, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise DataError(f"need at least 3 time points, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise DataError("raw times contain non-finite values")
    if np.any(np.diff(t) <= 0):
        bad = int(np.argmax(np.diff(t) <= 0))
        raise DataError(
            f"raw times must be strictly increasing; violation after index {bad} "
            f"({t[bad]} -> {t[bad + 1]})")
    span = t[-1] - t[0]
    return TimeGrid((t - t[0]) / span)
