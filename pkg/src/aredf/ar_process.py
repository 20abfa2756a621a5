"""Stationary AR(p) simulation with additive Bernoulli gross errors.

The centered process follows u_t = b_1 u_{t-1} + ... + b_p u_{t-p} + e_t,
the level series is v_t = mu + u_t, and the observed series is
y_t = v_t + z_t * xi_t where z_t is Bernoulli with probability
min(1, intensity / sqrt(n)) and xi_t follows the outlier law.  Arrays in a
:class:`SamplePath` cover t = 1-p .. n (pre-sample included); innovations
cover t = 1 .. n.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "ModelError",
    "StationarityResult",
    "check_stationary",
    "ARModelSpec",
    "ContaminationSpec",
    "SamplePath",
    "default_burn_in",
    "simulate_clean",
    "contaminate",
    "path_to_csv",
    "read_observations",
]

STATIONARITY_MARGIN = 1e-8


class ModelError(ValueError):
    """Raised for model specifications outside the stationary region."""


@dataclass(frozen=True)
class StationarityResult:
    stationary: bool
    max_root_modulus: float


def check_stationary(beta):
    """Check that all roots of z^p - b_1 z^{p-1} - ... - b_p lie inside the unit circle."""
    b = np.atleast_1d(np.asarray(beta, dtype=float))
    if b.ndim != 1 or b.size == 0:
        raise ValueError("beta must be a nonempty coefficient vector")
    if not np.all(np.isfinite(b)):
        raise ValueError("beta coefficients must be finite")
    roots = np.roots(np.concatenate(([1.0], -b)))
    modulus = float(np.max(np.abs(roots))) if roots.size else 0.0
    return StationarityResult(modulus < 1.0 - STATIONARITY_MARGIN, modulus)


@dataclass(frozen=True)
class ARModelSpec:
    """Order-p autoregression with mean ``mu`` and coefficients ``beta``."""

    beta: tuple
    mu: float = 0.0

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        object.__setattr__(self, "beta", beta)
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")
        res = check_stationary(beta)
        if not res.stationary:
            raise ModelError(f"model not stationary: root modulus {res.max_root_modulus}")

    @property
    def p(self):
        return len(self.beta)

    @property
    def ar_poly_at_one(self):
        """1 - b_1 - ... - b_p: the AR polynomial at z = 1 (always > 0 when stationary)."""
        return 1.0 - float(sum(self.beta))

    @property
    def intercept(self):
        """nu = (1 - b_1 - ... - b_p) * mu, the intercept of the level equation."""
        return self.ar_poly_at_one * self.mu


@dataclass(frozen=True)
class ContaminationSpec:
    """Outlier intensity and value law; the per-observation rate is min(1, intensity/sqrt(n))."""

    intensity: float
    outliers: object

    def __post_init__(self):
        if not (np.isfinite(self.intensity) and self.intensity >= 0.0):
            raise ValueError("contamination intensity must be finite and >= 0")

    def rate_for(self, n):
        return min(1.0, self.intensity / np.sqrt(n))


@dataclass
class SamplePath:
    """One simulated series; u/v/y/z/xi have length p+n (t = 1-p..n), eps length n."""

    n: int
    p: int
    u: np.ndarray
    v: np.ndarray
    eps: np.ndarray
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    xi: np.ndarray | None = None

    @property
    def t(self):
        return np.arange(1 - self.p, self.n + 1)

    def require_observed(self):
        if self.y is None:
            raise ValueError("path has no observations; call contaminate() first")


def default_burn_in(p):
    return 1000 + 10 * int(p)


def simulate_clean(model, dist, n, rng, burn_in=None):
    """Simulate the clean series; pre-sample values come from the tail of the burn-in run.

    The recursion starts from zeros and runs ``burn_in + p + n`` steps; the
    last ``p + n`` values form the path, so the recursion identity holds
    exactly for t = 1..n given the stored pre-sample values.
    """
    p = model.p
    if n < p + 1:
        raise ValueError(f"need n >= p+1, got n={n}")
    if burn_in is None:
        burn_in = default_burn_in(p)
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    total = int(burn_in) + p + int(n)
    eps_all = np.asarray(dist.sample(rng, total), dtype=float)
    a = np.concatenate(([1.0], -np.asarray(model.beta, dtype=float)))
    u_all = lfilter([1.0], a, eps_all)
    u = u_all[burn_in:]
    v = model.mu + u
    return SamplePath(n=int(n), p=p, u=u, v=v, eps=eps_all[burn_in + p:])


def contaminate(path, spec, rng):
    """Overlay Bernoulli gross errors on every observed index, pre-sample included."""
    rate = spec.rate_for(path.n)
    m = path.p + path.n
    z = rng.random(m) < rate
    xi = np.asarray(spec.outliers.sample(rng, m), dtype=float)
    y = path.v + np.where(z, xi, 0.0)
    return replace(path, y=y, z=z, xi=xi)


def path_to_csv(path, stream):
    """Write columns t, v, z, xi, y, eps (eps blank on pre-sample rows)."""
    path.require_observed()
    writer = csv.writer(stream)
    writer.writerow(["t", "v", "z", "xi", "y", "eps"])
    for i, t in enumerate(path.t):
        eps = repr(float(path.eps[i - path.p])) if t >= 1 else ""
        writer.writerow(
            [t, repr(float(path.v[i])), int(path.z[i]), repr(float(path.xi[i])),
             repr(float(path.y[i])), eps]
        )


def read_observations(stream):
    """Read a path CSV back; returns (y ordered by t, number of pre-sample rows)."""
    reader = csv.DictReader(stream)
    if reader.fieldnames is None or "y" not in reader.fieldnames:
        raise ValueError("path CSV must have a 'y' column")
    rows = [(int(r["t"]), float(r["y"])) for r in reader]
    if not rows:
        raise ValueError("path CSV has no data rows")
    rows.sort(key=lambda r: r[0])
    y = np.array([v for _, v in rows])
    presample = sum(1 for t, _ in rows if t <= 0)
    return y, presample
