"""Mean-zero innovation distributions for autoregression experiments.

Every distribution exposes the same small surface: ``cdf``, ``pdf``,
``pdf_deriv``, ``quantile``, ``sample`` plus ``mean``/``variance``.  The
catalogue is deliberately smooth and mean-zero: normal, Student-t and
Laplace rescaled to a chosen variance, finite mixtures of those, and the
sample-size-tied local mixture used for power studies.  All evaluation
methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

__all__ = [
    "Normal",
    "StudentT",
    "Laplace",
    "Mixture",
    "LocalMixture",
    "contaminated_normal",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _bisect_quantile(cdf, probs, scale, tol=1e-10):
    """Inverse of a continuous CDF by monotone bisection.

    Distribution-agnostic: only requires a vectorized nondecreasing ``cdf``.
    The returned points are within ``tol`` of the true quantiles.
    """
    p = np.asarray(probs, dtype=float)
    scalar = p.ndim == 0
    p = np.atleast_1d(p).astype(float).copy()
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("probabilities must lie in [0, 1]")
    out = np.empty_like(p)
    out[p == 0.0] = -np.inf
    out[p == 1.0] = np.inf
    inner = (p > 0.0) & (p < 1.0)
    if inner.any():
        t = p[inner]
        half = 2.0 * max(float(scale), 1.0)
        lo = np.full(t.shape, -half)
        hi = np.full(t.shape, half)
        for _ in range(200):
            need = cdf(lo) > t
            if not need.any():
                break
            lo[need] *= 2.0
        for _ in range(200):
            need = cdf(hi) < t
            if not need.any():
                break
            hi[need] *= 2.0
        for _ in range(200):
            if float(np.max(hi - lo)) <= tol:
                break
            mid = 0.5 * (lo + hi)
            below = cdf(mid) < t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out[inner] = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out


class MeanZeroDistribution:
    """Shared behaviour of the catalogue members."""

    mean = 0.0

    @property
    def stddev(self):
        return math.sqrt(self.variance)

    def quantile(self, probs):
        """Inverse CDF; probabilities 0 and 1 map to -inf/+inf."""
        return _bisect_quantile(self.cdf, probs, self.stddev)


@dataclass(frozen=True)
class Normal(MeanZeroDistribution):
    """N(0, sigma^2)."""

    sigma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError("sigma must be finite and positive")

    @property
    def variance(self):
        return self.sigma * self.sigma

    def cdf(self, x):
        return special.ndtr(np.asarray(x, dtype=float) / self.sigma)

    def pdf(self, x):
        z = np.asarray(x, dtype=float) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * _SQRT_2PI)

    def pdf_deriv(self, x):
        x = np.asarray(x, dtype=float)
        return -x / (self.sigma * self.sigma) * self.pdf(x)

    def sample(self, rng, size):
        return rng.normal(0.0, self.sigma, int(size))


@dataclass(frozen=True)
class StudentT(MeanZeroDistribution):
    """Student-t rescaled to unit variance; requires df > 2."""

    df: float = 5.0

    def __post_init__(self):
        if not (np.isfinite(self.df) and self.df > 2.0):
            raise ValueError("df must be finite and greater than 2")

    @property
    def _scale(self):
        return math.sqrt((self.df - 2.0) / self.df)

    @property
    def variance(self):
        return 1.0

    def cdf(self, x):
        return stats.t.cdf(np.asarray(x, dtype=float) / self._scale, self.df)

    def pdf(self, x):
        c = self._scale
        return stats.t.pdf(np.asarray(x, dtype=float) / c, self.df) / c

    def pdf_deriv(self, x):
        c = self._scale
        u = np.asarray(x, dtype=float) / c
        core = stats.t.pdf(u, self.df)
        return core * (-(self.df + 1.0) * u / (self.df + u * u)) / (c * c)

    def sample(self, rng, size):
        return rng.standard_t(self.df, int(size)) * self._scale


@dataclass(frozen=True)
class Laplace(MeanZeroDistribution):
    """Double exponential rescaled to variance sigma^2."""

    sigma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError("sigma must be finite and positive")

    @property
    def _b(self):
        return self.sigma / math.sqrt(2.0)

    @property
    def variance(self):
        return self.sigma * self.sigma

    def cdf(self, x):
        z = np.asarray(x, dtype=float) / self._b
        tail = 0.5 * np.exp(-np.abs(z))
        return np.where(z < 0.0, tail, 1.0 - tail)

    def pdf(self, x):
        z = np.asarray(x, dtype=float) / self._b
        return np.exp(-np.abs(z)) / (2.0 * self._b)

    def pdf_deriv(self, x):
        # slope at the kink (x = 0) reported as 0, matching central differences
        x = np.asarray(x, dtype=float)
        return -np.sign(x) / self._b * self.pdf(x)

    def sample(self, rng, size):
        return rng.laplace(0.0, self._b, int(size))


def _validate_components(components):
    for c in components:
        if getattr(c, "mean", None) != 0.0:
            raise ValueError("mixture components must have mean zero")
        v = c.variance
        if not (np.isfinite(v) and v > 0.0):
            raise ValueError("mixture components must have finite positive variance")


@dataclass(frozen=True)
class Mixture(MeanZeroDistribution):
    """Finite mixture of mean-zero components with fixed weights."""

    components: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.components) == 0 or len(self.components) != len(self.weights):
            raise ValueError("components and weights must be nonempty and aligned")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        _validate_components(self.components)

    @property
    def variance(self):
        return float(sum(w * c.variance for w, c in zip(self.weights, self.components)))

    def cdf(self, x):
        return sum(w * c.cdf(x) for w, c in zip(self.weights, self.components))

    def pdf(self, x):
        return sum(w * c.pdf(x) for w, c in zip(self.weights, self.components))

    def pdf_deriv(self, x):
        return sum(w * c.pdf_deriv(x) for w, c in zip(self.weights, self.components))

    def sample(self, rng, size):
        size = int(size)
        u = rng.random(size)
        draws = [c.sample(rng, size) for c in self.components]
        cuts = np.cumsum(np.asarray(self.weights, dtype=float))
        idx = np.minimum(np.searchsorted(cuts, u, side="right"), len(draws) - 1)
        return np.stack(draws)[idx, np.arange(size)] if size else np.empty(0)


def contaminated_normal(fraction, sigma_wide, sigma=1.0):
    """Two-point normal scale mixture: (1-fraction) N(0,sigma^2) + fraction N(0,sigma_wide^2)."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    return Mixture((Normal(sigma), Normal(sigma_wide)), (1.0 - fraction, fraction))


@dataclass(frozen=True)
class LocalMixture(MeanZeroDistribution):
    """Two-component mixture whose minority weight shrinks like 1/sqrt(n).

    The mixture puts weight ``amplify / sqrt(n)`` on ``h`` and the remainder
    on ``g0``.  When ``h`` equals ``g0`` the mixture is the base distribution
    and sampling short-circuits to ``g0.sample`` so paired experiments
    consume the generator stream identically.
    """

    g0: MeanZeroDistribution
    h: MeanZeroDistribution
    n: int
    amplify: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("mixture weight amplify/sqrt(n) must lie in [0, 1]")
        _validate_components((self.g0, self.h))

    @property
    def weight(self):
        return self.amplify / math.sqrt(self.n)

    @property
    def variance(self):
        w = self.weight
        return (1.0 - w) * self.g0.variance + w * self.h.variance

    def cdf(self, x):
        w = self.weight
        return (1.0 - w) * self.g0.cdf(x) + w * self.h.cdf(x)

    def pdf(self, x):
        w = self.weight
        return (1.0 - w) * self.g0.pdf(x) + w * self.h.pdf(x)

    def pdf_deriv(self, x):
        w = self.weight
        return (1.0 - w) * self.g0.pdf_deriv(x) + w * self.h.pdf_deriv(x)

    def sample(self, rng, size):
        if self.h == self.g0:
            return self.g0.sample(rng, size)
        size = int(size)
        u = rng.random(size)
        base = self.g0.sample(rng, size)
        alt = self.h.sample(rng, size)
        return np.where(u < self.weight, alt, base)
