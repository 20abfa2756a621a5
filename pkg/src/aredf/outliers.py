"""Gross-error (outlier) value distributions.

These are the laws of the additive shocks planted into observed series.
Unlike innovations they may be asymmetric, heavy tailed, or degenerate;
only ``sample`` is mandatory.  ``atoms`` or ``pdf``/``support`` are
optional capabilities used by the quadrature path of the shift functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PointMass",
    "AtomMixture",
    "NormalOutliers",
    "CauchyOutliers",
    "UniformOutliers",
]


@dataclass(frozen=True)
class PointMass:
    value: float = 0.0

    def atoms(self):
        return ((float(self.value), 1.0),)

    def sample(self, rng, size):
        return np.full(int(size), float(self.value))


@dataclass(frozen=True)
class AtomMixture:
    values: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.values) == 0 or len(self.values) != len(self.weights):
            raise ValueError("values and weights must be nonempty and aligned")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")

    def atoms(self):
        return tuple((float(v), float(w)) for v, w in zip(self.values, self.weights))

    def sample(self, rng, size):
        u = rng.random(int(size))
        cuts = np.cumsum(np.asarray(self.weights, dtype=float))
        idx = np.minimum(np.searchsorted(cuts, u, side="right"), len(self.values) - 1)
        return np.asarray(self.values, dtype=float)[idx]


@dataclass(frozen=True)
class NormalOutliers:
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.sd) and self.sd > 0.0):
            raise ValueError("sd must be finite and positive")

    support = (-np.inf, np.inf)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return np.exp(-0.5 * z * z) / (self.sd * math.sqrt(2.0 * math.pi))

    def sample(self, rng, size):
        return rng.normal(self.mean, self.sd, int(size))


@dataclass(frozen=True)
class CauchyOutliers:
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError("scale must be finite and positive")

    support = (-np.inf, np.inf)

    def pdf(self, x):
        d = np.asarray(x, dtype=float) - self.loc
        return self.scale / (math.pi * (self.scale * self.scale + d * d))

    def sample(self, rng, size):
        return self.loc + self.scale * rng.standard_cauchy(int(size))


@dataclass(frozen=True)
class UniformOutliers:
    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.low) and np.isfinite(self.high) and self.low < self.high):
            raise ValueError("need finite low < high")

    @property
    def support(self):
        return (self.low, self.high)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.low) & (x <= self.high)
        return np.where(inside, 1.0 / (self.high - self.low), 0.0)

    def sample(self, rng, size):
        return rng.uniform(self.low, self.high, int(size))
