"""Blocked Gibbs sampler for the covariate-guided spline mixture.

One sweep updates, in order: (1) spline coefficients per component/entry,
(2) error variances, (3) smoothing variances, (4) Polya-Gamma variables and
extended logistic coefficients per non-reference component, (5) random-
intercept variances, (6) mixing weights, (7) allocations.  The per-sweep
observed-data log likelihood (allocations marginalized out) is recorded for
retained sweeps.

The step functions are module-level and operate on plain arrays so they can
be exercised in isolation; `GibbsChain` wires them together and owns the
state, and `run_chain` is the driver used by the command-line layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import logsumexp

from .basis import BasisSet, build_basis
from .errors import ConfigError, NumericalError
from .model import (ComponentParams, Dataset, Hyperparams, LatentState,
                    component_means, log_density_matrix,
                    marginal_mixing_weights, mixing_weight_matrix)
from .rng import RngStream, draw_inverse_gamma, draw_polya_gamma

__all__ = [
    "FitConfig",
    "PosteriorSamples",
    "GibbsChain",
    "run_chain",
    "step_theta",
    "step_sigma",
    "step_tau",
    "step_delta",
    "step_kappa",
]

# Linear predictors are clipped here before Polya-Gamma draws; beyond this
# the augmented draw is numerically indistinguishable from its limit.
ETA_CLIP = 700.0

_INITS = ("kmeans", "random")


@dataclass(frozen=True)
class FitConfig:
    """Sampler settings for a single chain."""

    G: int
    m: int = 10
    iterations: int = 20000
    burn_in: int = 4000
    thin: int = 1
    seed: int = 0
    init: str = "kmeans"
    hyper: Hyperparams = field(default_factory=Hyperparams)

    def __post_init__(self):
        if self.G < 1:
            raise ConfigError(f"G must be at least 1, got {self.G}")
        if self.m < 1:
            raise ConfigError(f"m must be at least 1, got {self.m}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be positive, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError(
                f"burn_in must lie in [0, iterations), got {self.burn_in} "
                f"with iterations={self.iterations}")
        if self.thin < 1:
            raise ConfigError(f"thin must be at least 1, got {self.thin}")
        if self.kept < 1:
            raise ConfigError(
                f"no sweeps would be retained (iterations={self.iterations}, "
                f"burn_in={self.burn_in}, thin={self.thin})")
        if self.init not in _INITS:
            raise ConfigError(f"init must be one of {_INITS}, got {self.init!r}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    @property
    def kept(self) -> int:
        """Number of retained sweeps after burn-in and thinning."""
        return (self.iterations - self.burn_in) // self.thin


@dataclass
class PosteriorSamples:
    """Retained draws from one chain, stacked sweep-first."""

    alpha: np.ndarray     # (S, G, K, 2)
    beta: np.ndarray      # (S, G, K, m)
    sigma_sq: np.ndarray  # (S, G, K)
    tau_sq: np.ndarray    # (S, G, K)
    delta: np.ndarray     # (S, G, P+1)
    zeta: np.ndarray      # (S, G, N)
    kappa_sq: np.ndarray  # (S, G)
    z: np.ndarray         # (S, N) component labels
    log_lik: np.ndarray   # (S,) log likelihood per sweep, allocations and
                          # subject intercepts both integrated out
    config: FitConfig

    @property
    def S(self) -> int:
        return self.alpha.shape[0]

    @property
    def G(self) -> int:
        return self.alpha.shape[1]

    _ARRAYS = ("alpha", "beta", "sigma_sq", "tau_sq", "delta", "zeta",
               "kappa_sq", "z", "log_lik")

    def to_npz(self, path):
        cfg = self.config
        h = cfg.hyper
        np.savez_compressed(
            path,
            **{name: getattr(self, name) for name in self._ARRAYS},
            config=np.array([cfg.G, cfg.m, cfg.iterations, cfg.burn_in,
                             cfg.thin, cfg.seed], dtype=np.int64),
            init=np.array(cfg.init),
            hyper=np.array([h.sigma_alpha_sq, h.nu_sigma, h.A_sigma, h.nu_tau,
                            h.A_tau, h.nu_kappa, h.A_kappa, h.sigma_delta_sq]),
        )

    @classmethod
    def from_npz(cls, path) -> "PosteriorSamples":
        with np.load(path) as data:
            c = data["config"]
            h = data["hyper"]
            config = FitConfig(
                G=int(c[0]), m=int(c[1]), iterations=int(c[2]), burn_in=int(c[3]),
                thin=int(c[4]), seed=int(c[5]), init=str(data["init"]),
                hyper=Hyperparams(*h.tolist()))
            return cls(**{name: data[name] for name in cls._ARRAYS}, config=config)


# ---------------------------------------------------------------------------
# Conditional draws
# ---------------------------------------------------------------------------

def _chol_normal_draw(prec: np.ndarray, rhs: np.ndarray, rng: RngStream,
                      scale: float = 1.0):
    """Draw from N(prec^-1 rhs, scale * prec^-1) via a Cholesky of prec."""
    try:
        factor = cho_factor(prec, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"precision matrix not positive definite ({exc}); "
            f"dim={prec.shape[0]}") from exc
    mean = cho_solve(factor, rhs)
    noise = solve_triangular(factor[0], rng.gen.standard_normal(rhs.size),
                             lower=True, trans="T")
    return mean + math.sqrt(scale) * noise


def step_theta(sts: np.ndarray, sy_sum: np.ndarray, n_g: int, sigma_sq: float,
               tau_sq: float, sigma_alpha_sq: float, rng: RngStream) -> np.ndarray:
    """Draw the stacked (alpha, beta) coefficients for one (component, entry).

    Conditional is N(u, sigma_sq * Lam) with Lam = (n_g S'S + sigma_sq D^-1)^-1
    and u = Lam @ sy_sum, where D holds the prior variances and sy_sum is
    sum_i z_ig S'y_ik.  With n_g = 0 this reduces to the prior.
    """
    d = sts.shape[0]
    prior_var = np.concatenate([np.full(2, sigma_alpha_sq), np.full(d - 2, tau_sq)])
    prec = n_g * sts + np.diag(sigma_sq / prior_var)
    return _chol_normal_draw(prec, sy_sum, rng, scale=sigma_sq)


def step_sigma(ssr: float, n_obs: int, sigma_sq_cur: float, nu: float, A: float,
               rng: RngStream) -> tuple[float, float]:
    """Refresh (sigma_sq, a) for one (component, entry) error variance.

    ssr is the summed squared residual over the component's members and
    n_obs the matching observation count; both zero yields the prior pair.
    """
    a = draw_inverse_gamma(0.5 * (nu + 1.0), nu / sigma_sq_cur + A ** -2, rng)
    sigma_sq = draw_inverse_gamma(0.5 * (n_obs + nu), 0.5 * ssr + nu / a, rng)
    return float(sigma_sq), float(a)


def step_tau(beta_gk: np.ndarray, tau_sq_cur: float, nu: float, A: float,
             rng: RngStream) -> tuple[float, float]:
    """Refresh (tau_sq, a) for one (component, entry) smoothing variance."""
    a = draw_inverse_gamma(0.5 * (nu + 1.0), nu / tau_sq_cur + A ** -2, rng)
    tau_sq = draw_inverse_gamma(0.5 * (nu + beta_gk.size),
                                0.5 * beta_gk @ beta_gk + nu / a, rng)
    return float(tau_sq), float(a)


def step_delta(vstar: np.ndarray, omega_g: np.ndarray, xi_g: np.ndarray,
               c_g: np.ndarray, prior_var: np.ndarray, rng: RngStream) -> np.ndarray:
    """Draw the extended coefficient vector (delta_g, zeta_g) jointly.

    Polya-Gamma-conditional Gaussian: precision V*' Omega V* + B^-1 and
    mean solving that against V*' (Omega c + xi), with xi_ig = z_ig - 1/2
    and c the log-sum of the competing components' predictors.
    """
    prec = (vstar.T * omega_g) @ vstar + np.diag(1.0 / prior_var)
    rhs = vstar.T @ (omega_g * c_g + xi_g)
    return _chol_normal_draw(prec, rhs, rng)


def step_kappa(zeta_g: np.ndarray, kappa_sq_cur: float, nu: float, A: float,
               rng: RngStream, informative: bool = True) -> tuple[float, float]:
    """Refresh (kappa_sq, a) for one component's random-intercept variance.

    The reference component's intercepts are pinned at zero, so its
    variance is refreshed from the prior pair (informative=False).
    """
    a = draw_inverse_gamma(0.5 * (nu + 1.0), nu / kappa_sq_cur + A ** -2, rng)
    if informative:
        kappa_sq = draw_inverse_gamma(0.5 * (nu + zeta_g.size),
                                      0.5 * zeta_g @ zeta_g + nu / a, rng)
    else:
        kappa_sq = draw_inverse_gamma(0.5 * nu, nu / a, rng)
    return float(kappa_sq), float(a)


def _draw_categorical(probs: np.ndarray, rng: RngStream) -> np.ndarray:
    """One categorical draw per row of a probability matrix."""
    u = rng.gen.random(probs.shape[0])
    labels = (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)
    return np.minimum(labels, probs.shape[1] - 1)


# ---------------------------------------------------------------------------
# Chain
# ---------------------------------------------------------------------------

class GibbsChain:
    """Mutable sampler state with a one-sweep update.

    Exposes single sweeps (rather than only a run loop) so that joint-
    distribution tests can interleave parameter updates with data redraws.
    """

    def __init__(self, dataset: Dataset, config: FitConfig, rng: RngStream = None):
        self.dataset = dataset
        self.config = config
        self.hyper = config.hyper
        self.rng = rng if rng is not None else RngStream(config.seed)
        self.basis = build_basis(dataset.grid, config.m)
        self.vstar = np.hstack([dataset.covariates, np.eye(dataset.N)])
        self._set_projections(dataset.y)
        self.params: ComponentParams = None
        self.latent: LatentState = None
        self.log_lik = math.nan

    # -- data plumbing ------------------------------------------------------

    def _set_projections(self, y: np.ndarray):
        S = self.basis.S
        self.sts = S.T @ S
        self.sty = np.einsum("nd,ikn->ikd", S, y)   # (N, K, d)
        self.yy = np.einsum("ikn,ikn->ik", y, y)    # (N, K)

    def set_responses(self, y: np.ndarray):
        """Swap in new response curves (same subjects/grid), e.g. replayed data."""
        self.dataset = Dataset(y=y, covariates=self.dataset.covariates,
                               grid=self.dataset.grid,
                               cov_means=self.dataset.cov_means,
                               cov_sds=self.dataset.cov_sds)
        self._set_projections(self.dataset.y)

    # -- initialization -----------------------------------------------------

    def _prior_variances(self) -> tuple[np.ndarray, ...]:
        """Two-stage half-t draws for every variance parameter."""
        G, K = self.config.G, self.dataset.K
        h, rng = self.hyper, self.rng
        a_sigma = draw_inverse_gamma(0.5, h.A_sigma ** -2, rng, size=(G, K))
        sigma_sq = draw_inverse_gamma(0.5 * h.nu_sigma, h.nu_sigma / a_sigma, rng)
        a_tau = draw_inverse_gamma(0.5, h.A_tau ** -2, rng, size=(G, K))
        tau_sq = draw_inverse_gamma(0.5 * h.nu_tau, h.nu_tau / a_tau, rng)
        a_kappa = draw_inverse_gamma(0.5, h.A_kappa ** -2, rng, size=G)
        kappa_sq = draw_inverse_gamma(0.5 * h.nu_kappa, h.nu_kappa / a_kappa, rng)
        return a_sigma, sigma_sq, a_tau, tau_sq, a_kappa, kappa_sq

    def _prior_logistic(self, kappa_sq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        G, N, P1 = self.config.G, self.dataset.N, self.dataset.P + 1
        delta = np.zeros((G, P1))
        zeta = np.zeros((G, N))
        for g in range(G - 1):
            delta[g] = self.rng.gen.normal(0.0, math.sqrt(self.hyper.sigma_delta_sq), P1)
            zeta[g] = self.rng.gen.normal(0.0, math.sqrt(kappa_sq[g]), N)
        return delta, zeta

    def _init_labels(self) -> np.ndarray:
        N, G = self.dataset.N, self.config.G
        if G == 1:
            return np.zeros(N, dtype=np.int64)
        if self.config.init == "random":
            return self.rng.gen.integers(0, G, size=N)
        flat = self.dataset.y.reshape(N, -1)
        _, labels = kmeans2(flat, G, minit="++", seed=self.rng.gen)
        return labels.astype(np.int64)

    def initialize(self):
        """Start the chain: allocations per the configured strategy, variances
        and logistic parameters from their priors."""
        G, N, K = self.config.G, self.dataset.N, self.dataset.K
        m = self.basis.m
        labels = self._init_labels()
        a_sigma, sigma_sq, a_tau, tau_sq, a_kappa, kappa_sq = self._prior_variances()
        delta, zeta = self._prior_logistic(kappa_sq)
        self.params = ComponentParams(
            alpha=np.zeros((G, K, 2)), beta=np.zeros((G, K, m)),
            tau_sq=tau_sq, sigma_sq=sigma_sq, delta=delta, zeta=zeta,
            kappa_sq=kappa_sq)
        z = np.zeros((N, G), dtype=np.int8)
        z[np.arange(N), labels] = 1
        self.latent = LatentState(z=z, omega=np.full((N, G), 0.25),
                                  a_sigma=a_sigma, a_tau=a_tau, a_kappa=a_kappa)

    def draw_prior(self):
        """Draw every parameter and allocation from the generative prior.

        This is the marginal side of a joint-distribution check; responses
        are not touched here.
        """
        G, N, K = self.config.G, self.dataset.N, self.dataset.K
        m = self.basis.m
        h, rng = self.hyper, self.rng
        a_sigma, sigma_sq, a_tau, tau_sq, a_kappa, kappa_sq = self._prior_variances()
        alpha = rng.gen.normal(0.0, math.sqrt(h.sigma_alpha_sq), (G, K, 2))
        beta = rng.gen.standard_normal((G, K, m)) * np.sqrt(tau_sq)[:, :, None]
        delta, zeta = self._prior_logistic(kappa_sq)
        self.params = ComponentParams(alpha=alpha, beta=beta, tau_sq=tau_sq,
                                      sigma_sq=sigma_sq, delta=delta, zeta=zeta,
                                      kappa_sq=kappa_sq)
        weights = mixing_weight_matrix(self.dataset.covariates, delta, zeta)
        labels = _draw_categorical(weights, rng)
        z = np.zeros((N, G), dtype=np.int8)
        z[np.arange(N), labels] = 1
        omega = np.full((N, G), 0.25)
        eta_all = self.dataset.covariates @ delta.T + zeta.T
        for g in range(G - 1):
            others = [h_ for h_ in range(G) if h_ != g]
            c_g = np.logaddexp.reduce(eta_all[:, others], axis=1)
            eta_g = np.clip(eta_all[:, g] - c_g, -ETA_CLIP, ETA_CLIP)
            omega[:, g] = draw_polya_gamma(eta_g, rng)
        self.latent = LatentState(z=z, omega=omega, a_sigma=a_sigma,
                                  a_tau=a_tau, a_kappa=a_kappa)

    # -- one sweep ----------------------------------------------------------

    def sweep(self):
        """One full scan over all conditional blocks."""
        p, lat, h, rng = self.params, self.latent, self.hyper, self.rng
        G, K, N = p.G, p.K, self.dataset.N
        n = self.dataset.n
        zf = lat.z.astype(float)
        counts = zf.sum(axis=0)                                # (G,)
        sy_sums = np.einsum("ig,ikd->gkd", zf, self.sty)       # (G, K, d)
        yy_sums = zf.T @ self.yy                               # (G, K)

        # 1-3: spline coefficients, error variances, smoothing variances
        for g in range(G):
            n_g = int(counts[g])
            for k in range(K):
                theta = step_theta(self.sts, sy_sums[g, k], n_g, p.sigma_sq[g, k],
                                   p.tau_sq[g, k], h.sigma_alpha_sq, rng)
                p.alpha[g, k] = theta[:2]
                p.beta[g, k] = theta[2:]
                ssr = max(yy_sums[g, k] - 2.0 * theta @ sy_sums[g, k]
                          + n_g * theta @ self.sts @ theta, 0.0)
                p.sigma_sq[g, k], lat.a_sigma[g, k] = step_sigma(
                    ssr, n * n_g, p.sigma_sq[g, k], h.nu_sigma, h.A_sigma, rng)
                p.tau_sq[g, k], lat.a_tau[g, k] = step_tau(
                    p.beta[g, k], p.tau_sq[g, k], h.nu_tau, h.A_tau, rng)

        # 4: Polya-Gamma variables and extended logistic coefficients
        eta_all = self.dataset.covariates @ p.delta.T + p.zeta.T   # (N, G)
        P1 = self.dataset.P + 1
        for g in range(G - 1):
            others = [h_ for h_ in range(G) if h_ != g]
            c_g = np.logaddexp.reduce(eta_all[:, others], axis=1)
            eta_g = np.clip(eta_all[:, g] - c_g, -ETA_CLIP, ETA_CLIP)
            lat.omega[:, g] = draw_polya_gamma(eta_g, rng)
            prior_var = np.concatenate([np.full(P1, h.sigma_delta_sq),
                                        np.full(N, p.kappa_sq[g])])
            xi_g = zf[:, g] - 0.5
            dstar = step_delta(self.vstar, lat.omega[:, g], xi_g, c_g,
                               prior_var, rng)
            p.delta[g] = dstar[:P1]
            p.zeta[g] = dstar[P1:]
            eta_all[:, g] = self.dataset.covariates @ p.delta[g] + p.zeta[g]

        # 5: random-intercept variances (reference refreshed from its prior)
        for g in range(G):
            informative = g < G - 1
            p.kappa_sq[g], lat.a_kappa[g] = step_kappa(
                p.zeta[g], p.kappa_sq[g], h.nu_kappa, h.A_kappa, rng,
                informative=informative)

        # 6-7: mixing weights, observed likelihood, allocations.  The
        # allocation draw conditions on the current intercepts (its full
        # conditional); the stored likelihood integrates the intercepts out
        # so model comparison scores the weight model itself rather than
        # one realization of the subject effects, which would otherwise let
        # a surplus component pay for its extra parameters by sorting
        # subjects on intercept noise.
        weights = mixing_weight_matrix(self.dataset.covariates, p.delta, p.zeta)
        means = component_means(p, self.basis)
        log_dens = log_density_matrix(self.dataset.y, means, p.sigma_sq)
        with np.errstate(divide="ignore"):
            logp = np.log(weights) + log_dens
        row_max = logp.max(axis=1, keepdims=True)
        if not np.all(np.isfinite(row_max)):
            bad = int(np.flatnonzero(~np.isfinite(row_max.ravel()))[0])
            raise NumericalError(
                f"subject {bad} has zero posterior mass in every component")
        pr = np.exp(logp - row_max)
        probs = pr / pr.sum(axis=1, keepdims=True)
        labels = _draw_categorical(probs, rng)
        lat.z[:] = 0
        lat.z[np.arange(N), labels] = 1
        bar = marginal_mixing_weights(self.dataset.covariates, p.delta,
                                      p.kappa_sq)
        with np.errstate(divide="ignore"):
            self.log_lik = float(logsumexp(np.log(bar) + log_dens, axis=1).sum())


def run_chain(dataset: Dataset, config: FitConfig,
              stream_id: int = 0) -> PosteriorSamples:
    """Run one chain and return the retained draws.

    Sweep l (1-based) is retained when l > burn_in and (l - burn_in) is a
    multiple of thin.  stream_id selects an independent substream of the
    seed, letting callers run several chains off one base seed.
    """
    chain = GibbsChain(dataset, config, rng=RngStream(config.seed, stream_id))
    chain.initialize()
    G, K, N = config.G, dataset.K, dataset.N
    m, P1, S = chain.basis.m, dataset.P + 1, config.kept
    out = PosteriorSamples(
        alpha=np.empty((S, G, K, 2)), beta=np.empty((S, G, K, m)),
        sigma_sq=np.empty((S, G, K)), tau_sq=np.empty((S, G, K)),
        delta=np.empty((S, G, P1)), zeta=np.empty((S, G, N)),
        kappa_sq=np.empty((S, G)), z=np.empty((S, N), dtype=np.int16),
        log_lik=np.empty(S), config=config)
    s = 0
    for sweep in range(1, config.iterations + 1):
        chain.sweep()
        if sweep > config.burn_in and (sweep - config.burn_in) % config.thin == 0:
            p = chain.params
            out.alpha[s] = p.alpha
            out.beta[s] = p.beta
            out.sigma_sq[s] = p.sigma_sq
            out.tau_sq[s] = p.tau_sq
            out.delta[s] = p.delta
            out.zeta[s] = p.zeta
            out.kappa_sq[s] = p.kappa_sq
            out.z[s] = chain.latent.labels
            out.log_lik[s] = chain.log_lik
            s += 1
    return out
