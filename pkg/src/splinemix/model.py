"""Data containers, parameter containers, and mixture-model evaluations.

All density arithmetic is in log space; mixtures are combined with
log-sum-exp so that the n*K-point density products (log magnitudes in the
thousands) never underflow.

Component indexing is 0-based throughout; the reference component whose
logistic parameters are pinned at zero is the last one, index G - 1.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .basis import BasisSet, TimeGrid
from .errors import DataError, NumericalError

__all__ = [
    "Dataset",
    "Hyperparams",
    "ComponentParams",
    "LatentState",
    "standardize_covariates",
    "component_mean",
    "component_means",
    "log_component_density",
    "log_density_matrix",
    "mixing_weights",
    "mixing_weight_matrix",
    "marginal_mixing_weights",
    "allocation_probs",
    "log_observed_likelihood",
]


@dataclass(frozen=True)
class Dataset:
    """Replicated multivariate series on a common grid plus subject covariates.

    y has shape (N, K, n): N subjects, K entries per subject, n time
    points.  covariates has shape (N, P + 1) with an all-ones first column.
    cov_means / cov_sds record the standardization applied by the ingestion
    layer (zeros / ones where a column was left untouched).
    """

    y: np.ndarray
    covariates: np.ndarray
    grid: TimeGrid
    cov_means: np.ndarray = None
    cov_sds: np.ndarray = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        v = np.asarray(self.covariates, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "covariates", v)
        if y.ndim != 3:
            raise DataError(f"responses must be (N, K, n), got shape {y.shape}")
        if y.shape[2] != self.grid.n:
            raise DataError(
                f"responses have {y.shape[2]} time points but the grid has {self.grid.n}")
        if not np.all(np.isfinite(y)):
            raise DataError("responses contain non-finite values")
        if v.ndim != 2 or v.shape[0] != y.shape[0]:
            raise DataError(
                f"covariates must be (N, P+1) with N={y.shape[0]}, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("covariates contain non-finite values")
        if not np.all(v[:, 0] == 1.0):
            raise DataError("covariates must carry an all-ones first column")
        if self.cov_means is None:
            object.__setattr__(self, "cov_means", np.zeros(v.shape[1]))
        if self.cov_sds is None:
            object.__setattr__(self, "cov_sds", np.ones(v.shape[1]))

    @property
    def N(self) -> int:
        return self.y.shape[0]

    @property
    def K(self) -> int:
        return self.y.shape[1]

    @property
    def n(self) -> int:
        return self.y.shape[2]

    @property
    def P(self) -> int:
        return self.covariates.shape[1] - 1


def standardize_covariates(dataset: Dataset) -> Dataset:
    """Center and scale the continuous covariate columns.

    Columns with more than two distinct values are treated as continuous;
    the intercept and binary columns are left alone.  The applied means and
    sds are recorded on the returned Dataset so coefficients can be
    reported on the standardized scale.
    """
    v = dataset.covariates.copy()
    means = np.zeros(v.shape[1])
    sds = np.ones(v.shape[1])
    for j in range(1, v.shape[1]):
        col = v[:, j]
        if np.unique(col).size <= 2:
            continue
        mu, sd = col.mean(), col.std(ddof=1)
        if sd == 0.0:
            raise DataError(f"covariate column {j} is constant; cannot standardize")
        v[:, j] = (col - mu) / sd
        means[j], sds[j] = mu, sd
    return Dataset(y=dataset.y, covariates=v, grid=dataset.grid,
                   cov_means=means, cov_sds=sds)


@dataclass(frozen=True)
class Hyperparams:
    """Prior settings; defaults follow the reference configuration."""

    sigma_alpha_sq: float = 100.0   # prior variance of intercept/slope coefficients
    nu_sigma: float = 3.0           # half-t df / scale for error sds
    A_sigma: float = 10.0
    nu_tau: float = 3.0             # half-t df / scale for smoothing sds
    A_tau: float = 10.0
    nu_kappa: float = 3.0           # half-t df / scale for random-intercept sds
    A_kappa: float = 10.0
    sigma_delta_sq: float = 10.0    # prior variance of logistic coefficients

    def __post_init__(self):
        for name in ("sigma_alpha_sq", "nu_sigma", "A_sigma", "nu_tau", "A_tau",
                     "nu_kappa", "A_kappa", "sigma_delta_sq"):
            if getattr(self, name) <= 0:
                raise ValueError(f"hyperparameter {name} must be positive")


@dataclass
class ComponentParams:
    """All mixture parameters, stacked over components.

    alpha: (G, K, 2) intercept/slope coefficients; beta: (G, K, m) basis
    coefficients; tau_sq / sigma_sq: (G, K) smoothing and error variances;
    delta: (G, P+1) logistic coefficients; zeta: (G, N) subject random
    intercepts; kappa_sq: (G,) random-intercept variances.  The reference
    component (last index) has delta and zeta identically zero.
    """

    alpha: np.ndarray
    beta: np.ndarray
    tau_sq: np.ndarray
    sigma_sq: np.ndarray
    delta: np.ndarray
    zeta: np.ndarray
    kappa_sq: np.ndarray

    @property
    def G(self) -> int:
        return self.alpha.shape[0]

    @property
    def K(self) -> int:
        return self.alpha.shape[1]

    @property
    def m(self) -> int:
        return self.beta.shape[2]

    def validate(self):
        if np.any(self.sigma_sq <= 0) or np.any(self.tau_sq <= 0) or np.any(self.kappa_sq <= 0):
            raise NumericalError("variance parameters must be strictly positive")
        if np.any(self.delta[-1] != 0.0) or np.any(self.zeta[-1] != 0.0):
            raise NumericalError("reference-component logistic parameters must be zero")

    def copy(self) -> "ComponentParams":
        return ComponentParams(*(getattr(self, f).copy() for f in
                                 ("alpha", "beta", "tau_sq", "sigma_sq",
                                  "delta", "zeta", "kappa_sq")))


@dataclass
class LatentState:
    """Allocations and augmentation variables for one Gibbs iteration."""

    z: np.ndarray        # (N, G) one-hot
    omega: np.ndarray    # (N, G) Polya-Gamma variables; reference column unused
    a_sigma: np.ndarray  # (G, K) scale-mixture latents for sigma_sq
    a_tau: np.ndarray    # (G, K) for tau_sq
    a_kappa: np.ndarray  # (G,) for kappa_sq

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.z, axis=1)

    def validate(self):
        if np.any(self.z.sum(axis=1) != 1):
            raise NumericalError("each allocation row must be one-hot")
        for name in ("omega", "a_sigma", "a_tau", "a_kappa"):
            if np.any(getattr(self, name) <= 0):
                raise NumericalError(f"augmentation variable {name} must be strictly positive")


# ---------------------------------------------------------------------------
# Evaluations
# ---------------------------------------------------------------------------

def component_mean(params: ComponentParams, basis: BasisSet, g: int, k: int) -> np.ndarray:
    """Mean trajectory X alpha + W beta for component g, entry k."""
    return basis.X @ params.alpha[g, k] + basis.W @ params.beta[g, k]


def component_means(params: ComponentParams, basis: BasisSet) -> np.ndarray:
    """All component mean trajectories, shape (G, K, n)."""
    return np.einsum("nj,gkj->gkn", basis.X, params.alpha) + \
        np.einsum("nj,gkj->gkn", basis.W, params.beta)


def log_component_density(y_ik, mean, sigma_sq: float) -> float:
    """Log density of an isotropic n-dimensional Gaussian."""
    if sigma_sq <= 0:
        raise NumericalError(f"component variance must be positive, got {sigma_sq}")
    r = np.asarray(y_ik, dtype=float) - np.asarray(mean, dtype=float)
    n = r.size
    return -0.5 * n * math.log(2.0 * math.pi * sigma_sq) - 0.5 * r @ r / sigma_sq


def log_density_matrix(y: np.ndarray, means: np.ndarray, sigma_sq: np.ndarray) -> np.ndarray:
    """Per-subject, per-component log densities summed over entries.

    y: (N, K, n); means: (G, K, n); sigma_sq: (G, K).  Returns (N, G).
    """
    n = y.shape[2]
    # ssr[i, g, k] = ||y_ik - mu_gk||^2
    diff = y[:, None, :, :] - means[None, :, :, :]
    ssr = np.einsum("igkn,igkn->igk", diff, diff)
    const = -0.5 * n * np.log(2.0 * math.pi * sigma_sq)  # (G, K)
    return (const[None] - 0.5 * ssr / sigma_sq[None]).sum(axis=2)


def mixing_weights(covariates_row, deltas, zetas_row) -> np.ndarray:
    """Covariate-driven component probabilities for one subject.

    Softmax of the per-component linear predictors V'delta_g + zeta_g,
    computed with max-subtraction; the reference component contributes a
    zero predictor by construction.
    """
    eta = np.asarray(deltas) @ np.asarray(covariates_row) + np.asarray(zetas_row)
    if not np.all(np.isfinite(eta)):
        raise NumericalError("non-finite linear predictor in mixing weights")
    eta = eta - eta.max()
    w = np.exp(eta)
    return w / w.sum()


def mixing_weight_matrix(covariates: np.ndarray, delta: np.ndarray,
                         zeta: np.ndarray) -> np.ndarray:
    """Mixing weights for all subjects at once: (N, G)."""
    eta = covariates @ delta.T + zeta.T
    if not np.all(np.isfinite(eta)):
        raise NumericalError("non-finite linear predictor in mixing weights")
    eta = eta - eta.max(axis=1, keepdims=True)
    w = np.exp(eta)
    return w / w.sum(axis=1, keepdims=True)


# Gauss-Hermite node counts per non-reference dimension.  The integrand
# (a softmax evaluated at shifted predictors) is analytic and bounded, so
# modest rules are accurate; counts taper as the product grid grows.
_GH_NODES = {1: 25, 2: 17, 3: 11, 4: 9, 5: 7}


def marginal_mixing_weights(covariates: np.ndarray, delta: np.ndarray,
                            kappa_sq: np.ndarray) -> np.ndarray:
    """Mixing weights with the subject-level intercepts integrated out.

    Averages the softmax weights over the N(0, kappa_sq_g) distribution of
    each non-reference intercept with a Gauss-Hermite product rule, giving
    the marginal P(z_ig = 1 | V_i) implied by the intercept model rather
    than the weights at one particular intercept draw.  Returns (N, G);
    rows sum to one.
    """
    covariates = np.asarray(covariates, dtype=float)
    delta = np.asarray(delta, dtype=float)
    N, G = covariates.shape[0], delta.shape[0]
    if G == 1:
        return np.ones((N, 1))
    eta = covariates @ delta.T
    if not np.all(np.isfinite(eta)):
        raise NumericalError("non-finite linear predictor in mixing weights")
    dims = G - 1
    scale = np.sqrt(np.asarray(kappa_sq, dtype=float)[:dims])
    if np.all(scale == 0.0):
        return mixing_weight_matrix(covariates, delta, np.zeros((G, N)))
    nodes, wts = np.polynomial.hermite_e.hermegauss(_GH_NODES.get(dims, 5))
    wts = wts / wts.sum()
    grids = np.meshgrid(*([nodes] * dims), indexing="ij")
    # (J, G) intercept offsets; the reference column stays zero.
    pert = np.stack([a.ravel() for a in grids], axis=-1) * scale
    pert = np.pad(pert, ((0, 0), (0, 1)))
    wprod = functools.reduce(np.multiply.outer, [wts] * dims).ravel()
    out = np.zeros_like(eta)
    for lo in range(0, pert.shape[0], 2048):
        block = eta[:, None, :] + pert[None, lo:lo + 2048, :]
        block -= block.max(axis=2, keepdims=True)
        np.exp(block, out=block)
        block /= block.sum(axis=2, keepdims=True)
        out += np.einsum("j,njg->ng", wprod[lo:lo + 2048], block)
    return out / out.sum(axis=1, keepdims=True)


def allocation_probs(y_i: np.ndarray, params: ComponentParams, basis: BasisSet,
                     weights_row) -> np.ndarray:
    """Posterior component probabilities for one subject's K series."""
    means = component_means(params, basis)
    log_dens = log_density_matrix(y_i[None], means, params.sigma_sq)[0]
    return _allocation_from_logs(log_dens, np.asarray(weights_row, dtype=float))


def _allocation_from_logs(log_dens_row: np.ndarray, weights_row: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        logp = np.log(weights_row) + log_dens_row
    if np.all(np.isneginf(logp)):
        raise NumericalError(
            f"all components have zero posterior mass; log-densities "
            f"{log_dens_row}, weights {weights_row}")
    logp = logp - logp.max()
    p = np.exp(logp)
    return p / p.sum()


def log_observed_likelihood(dataset: Dataset, params: ComponentParams, basis: BasisSet,
                            all_weights: np.ndarray) -> float:
    """Mixture log likelihood with allocations marginalized out.

    sum_i log sum_g pi_ig prod_k f_gk(y_ik), stabilized with log-sum-exp.
    """
    means = component_means(params, basis)
    log_dens = log_density_matrix(dataset.y, means, params.sigma_sq)
    with np.errstate(divide="ignore"):
        logp = np.log(all_weights) + log_dens
    return float(logsumexp(logp, axis=1).sum())
