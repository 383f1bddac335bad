"""Random-variate kernels used by the Gibbs sweeps.

Provides seeded, stream-splittable random state (`RngStream`) plus the four
draw kernels the sampler needs: Polya-Gamma PG(1, c), inverse-gamma,
squared half-t via its inverse-gamma scale mixture, and multivariate
normal draws from a supplied covariance factor.

Inverse-gamma is parameterized by (shape, rate) throughout, i.e. the
density is proportional to x^(-shape-1) * exp(-rate / x).  The rate is the
second argument everywhere; do not pass a scale.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import log_ndtr

from .errors import NumericalError

__all__ = [
    "RngStream",
    "draw_polya_gamma",
    "draw_inverse_gamma",
    "draw_half_t_sq",
    "draw_mvn",
]


class RngStream:
    """A named, reproducible random stream.

    Identical (seed, stream_id) pairs reproduce identical draw sequences;
    distinct stream_ids give statistically independent streams off the same
    seed, so parallel replicates and chains can each own one.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def substream(self, stream_id: int) -> "RngStream":
        """Independent stream derived from the same seed."""
        return RngStream(self.seed, stream_id)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


# ---------------------------------------------------------------------------
# Polya-Gamma PG(1, c): exact alternating-series rejection sampler.
#
# A PG(1, c) variate is J*(1, c/2) / 4 where J* is the (tilted) Jacobi
# random variable.  J*(1, z) is sampled by proposing from a mixture of a
# truncated exponential (right of the cutoff) and a truncated inverse
# Gaussian (left of it), then accepting via the alternating series
# expansion of the density evaluated just far enough to decide.
# ---------------------------------------------------------------------------

_T = 0.64  # series/proposal cutoff for J*(1, z)
_PI2 = math.pi * math.pi


def _log_igauss_cdf_lam1(x: float, z: float) -> float:
    # log CDF at x of the inverse Gaussian with mean 1/z and shape 1.
    # Written in terms of z so the z -> 0 (infinite-mean) limit is exact.
    rx = 1.0 / math.sqrt(x)
    lb = log_ndtr(rx * (x * z - 1.0))
    la = 2.0 * z + log_ndtr(-rx * (x * z + 1.0))
    m = max(lb, la)
    return m + math.log(math.exp(lb - m) + math.exp(la - m))


def _draw_trunc_inv_gauss(z: float, gen) -> float:
    # X ~ IG(mean=1/z, shape=1) restricted to (0, _T]; z >= 0.
    if z < 1.0 / _T:
        # mean exceeds the cutoff: propose from the z = 0 tail density
        while True:
            while True:
                e1 = gen.standard_exponential()
                e2 = gen.standard_exponential()
                if e1 * e1 <= 2.0 * e2 / _T:
                    break
            x = _T / ((1.0 + _T * e1) ** 2)
            if gen.random() <= math.exp(-0.5 * z * z * x):
                return x
    else:
        mu = 1.0 / z
        while True:
            y = gen.standard_normal()
            y *= y
            muy = mu * y
            x = mu * (1.0 + 0.5 * muy - 0.5 * math.sqrt(4.0 * muy + muy * muy))
            if gen.random() > mu / (mu + x):
                x = mu * mu / x
            if x <= _T:
                return x


def _series_coef(n: int, x: float) -> float:
    # n-th alternating-series coefficient of the J*(1) density at x.
    np5 = n + 0.5
    if x <= _T:
        return math.pi * np5 * (2.0 / (math.pi * x)) ** 1.5 * math.exp(-2.0 * np5 * np5 / x)
    return math.pi * np5 * math.exp(-0.5 * np5 * np5 * _PI2 * x)


def _draw_jacobi(z: float, gen) -> float:
    # One exact J*(1, z) draw, z >= 0.
    K = 0.125 * _PI2 + 0.5 * z * z
    logp = math.log(0.5 * math.pi / K) - K * _T
    logq = math.log(2.0) - z + _log_igauss_cdf_lam1(_T, z)
    m = max(logp, logq)
    p, q = math.exp(logp - m), math.exp(logq - m)
    right_frac = p / (p + q)
    while True:
        if gen.random() < right_frac:
            x = _T + gen.standard_exponential() / K
        else:
            x = _draw_trunc_inv_gauss(z, gen)
        s = _series_coef(0, x)
        y = gen.random() * s
        n = 0
        while True:
            n += 1
            if n & 1:
                s -= _series_coef(n, x)
                if y <= s:
                    return x
            else:
                s += _series_coef(n, x)
                if y > s:
                    break


def draw_polya_gamma(c, rng: RngStream):
    """Exact PG(1, c) draw(s).

    Parameters
    ----------
    c : float or array_like
        Tilting parameter(s); the distribution is symmetric in c.
    rng : RngStream

    Returns
    -------
    float or ndarray matching the shape of `c`.
    """
    c_arr = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(c_arr)):
        raise NumericalError("non-finite tilting parameter in PG(1, c) draw")
    gen = rng.gen
    if c_arr.ndim == 0:
        return 0.25 * _draw_jacobi(0.5 * abs(float(c_arr)), gen)
    out = np.empty(c_arr.size)
    flat = np.abs(c_arr.ravel())
    for i in range(flat.size):
        out[i] = 0.25 * _draw_jacobi(0.5 * flat[i], gen)
    return out.reshape(c_arr.shape)


def draw_inverse_gamma(shape, rate, rng: RngStream, size=None):
    """Inverse-gamma draw(s) with density proportional to x^(-shape-1) exp(-rate/x)."""
    shape_arr = np.asarray(shape, dtype=float)
    rate_arr = np.asarray(rate, dtype=float)
    if np.any(shape_arr <= 0) or np.any(rate_arr <= 0) or \
            not (np.all(np.isfinite(shape_arr)) and np.all(np.isfinite(rate_arr))):
        raise NumericalError(
            f"inverse-gamma requires positive finite (shape, rate), got ({shape}, {rate})")
    # reciprocal of Gamma(shape, rate); numpy's gamma takes a scale
    g = rng.gen.gamma(shape_arr, 1.0 / rate_arr, size=size)
    return 1.0 / g


def draw_half_t_sq(nu: float, A: float, rng: RngStream):
    """Squared half-t(nu, A) variate via its two-stage inverse-gamma mixture.

    Draws the mixing latent a ~ IG(1/2, 1/A^2) and then the variance from
    IG(nu/2, nu/a).  Within the Gibbs sweeps the two stages are drawn
    separately; this combined form is used for initialization.
    """
    if nu <= 0 or A <= 0:
        raise NumericalError(f"half-t requires positive (nu, A), got ({nu}, {A})")
    a = draw_inverse_gamma(0.5, 1.0 / (A * A), rng)
    return draw_inverse_gamma(0.5 * nu, nu / a, rng)


def draw_mvn(mean, cov_factor, rng: RngStream):
    """Multivariate normal draw: mean + cov_factor @ standard_normal.

    `cov_factor` is a (lower-triangular) factor L with covariance L L'.
    """
    mean = np.asarray(mean, dtype=float)
    L = np.asarray(cov_factor, dtype=float)
    if L.shape != (mean.size, mean.size):
        raise NumericalError(
            f"covariance factor shape {L.shape} does not match mean dimension {mean.size}")
    return mean + L @ rng.gen.standard_normal(mean.size)
