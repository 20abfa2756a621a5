"""Location and autoregression estimators robust to gross errors.

``estimate_mu`` fits the level of the observed series (sample median or a
Huber M-estimate with MAD scale).  ``estimate_beta`` fits the lag
coefficients by least squares or by a Mallows-weighted GM iteration:
iteratively reweighted least squares with Huber weights psi(u)/u on scaled
residuals and weights min(1, c/||x||) on the lagged regressors, c being the
0.95 quantile of the regressor norms.  ``residuals`` reconstructs the
innovations from the fitted parameters.

An "oracle" method pins estimates to the true model values (optionally with
a deliberate mu perturbation shrinking like 1/sqrt(n)); it exists so that
experiments can isolate individual expansion terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateDataError",
    "EstimatorConfig",
    "EstimateSet",
    "estimate_mu",
    "estimate_beta",
    "residuals",
    "estimate_path",
    "HUBER_K_DEFAULT",
    "MAD_TO_SIGMA",
]

HUBER_K_DEFAULT = 1.345
MAD_TO_SIGMA = 1.4826
MALLOWS_QUANTILE = 0.95

MU_METHODS = ("median", "huber-m", "oracle")
BETA_METHODS = ("ls", "gm-mallows", "oracle")


class DegenerateDataError(ValueError):
    """Raised when the regression design is singular (e.g. a constant series)."""


@dataclass(frozen=True)
class EstimatorConfig:
    method_mu: str = "huber-m"
    method_beta: str = "gm-mallows"
    huber_k: float = HUBER_K_DEFAULT
    tol: float = 1e-8
    max_iter: int = 100
    mu_shift: float = 0.0  # oracle only: mu_hat = mu + mu_shift / sqrt(n)

    def __post_init__(self):
        if self.method_mu not in MU_METHODS:
            raise ValueError(f"unknown mu method {self.method_mu!r}")
        if self.method_beta not in BETA_METHODS:
            raise ValueError(f"unknown beta method {self.method_beta!r}")
        if self.mu_shift != 0.0 and self.method_mu != "oracle":
            raise ValueError("mu_shift requires method_mu = 'oracle'")


@dataclass
class EstimateSet:
    mu_hat: float
    beta_hat: np.ndarray
    method_mu: str
    method_beta: str
    converged: bool
    iterations: int


def huber_psi(u, k=HUBER_K_DEFAULT):
    return np.clip(u, -k, k)


def mad_scale(x):
    """1.4826 * median(|x - median(x)|), the usual MAD-to-sigma rescaling."""
    x = np.asarray(x, dtype=float)
    return MAD_TO_SIGMA * float(np.median(np.abs(x - np.median(x))))


def estimate_mu(y, method="huber-m", huber_k=HUBER_K_DEFAULT, tol=1e-8):
    """Location estimate of the observed series.

    median: sample median (midpoint convention for even length).
    huber-m: root of sum(psi_k((y - m)/s)) with s = 1.4826 * MAD, found by
    bisection until |sum psi| < tol * len(y).
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("empty sample")
    if method == "median":
        return float(np.median(y))
    if method != "huber-m":
        raise ValueError(f"unknown mu method {method!r}")
    s = mad_scale(y)
    if s == 0.0:
        return float(np.median(y))
    lo, hi = float(np.min(y)), float(np.max(y))
    target = tol * y.size
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        total = float(np.sum(huber_psi((y - mid) / s, huber_k)))
        if abs(total) < target:
            break
        if total > 0.0:
            lo = mid
        else:
            hi = mid
    return mid


def _lag_design(u, p):
    u = np.asarray(u, dtype=float)
    rows = u.size - p
    if rows < p + 10:
        raise ValueError(f"series too short for AR({p}) fit: {u.size} values")
    X = np.column_stack([u[p - j: u.size - j] for j in range(1, p + 1)])
    return X, u[p:]


def estimate_beta(u_hat, p, method="gm-mallows", huber_k=HUBER_K_DEFAULT,
                  tol=1e-8, max_iter=100):
    """Fit lag coefficients; returns (beta_hat, converged, iterations)."""
    X, y = _lag_design(u_hat, p)
    if np.linalg.matrix_rank(X) < p:
        raise DegenerateDataError("lagged design is singular (constant series?)")
    start, *_ = np.linalg.lstsq(X, y, rcond=None)
    if method == "ls":
        return start, True, 0
    if method != "gm-mallows":
        raise ValueError(f"unknown beta method {method!r}")

    norms = np.sqrt(np.sum(X * X, axis=1))
    cutoff = float(np.quantile(norms, MALLOWS_QUANTILE))
    with np.errstate(divide="ignore"):
        w_x = np.where(norms > 0.0, np.minimum(1.0, cutoff / norms), 1.0)

    beta = start
    for it in range(1, max_iter + 1):
        r = y - X @ beta
        s = mad_scale(r)
        if s == 0.0:
            return beta, True, it
        u = r / s
        au = np.abs(u)
        with np.errstate(divide="ignore"):
            w_r = np.where(au > 0.0, np.minimum(1.0, huber_k / au), 1.0)
        w = w_r * w_x
        xw = X * w[:, None]
        beta_new = np.linalg.solve(X.T @ xw, xw.T @ y)
        if float(np.max(np.abs(beta_new - beta))) < tol:
            return beta_new, True, it
        beta = beta_new
    return beta, False, max_iter


def residuals(y, mu_hat, beta_hat):
    """Innovation reconstructions e_t = u_t - sum_j b_j u_{t-j}, u = y - mu_hat.

    ``y`` must cover t = 1-p .. n; the result covers t = 1 .. n (length n).
    Pure linear algebra, exact up to round-off.
    """
    y = np.asarray(y, dtype=float)
    beta = np.atleast_1d(np.asarray(beta_hat, dtype=float))
    p = beta.size
    if y.size <= p:
        raise ValueError(f"need more than p={p} observations, got {y.size}")
    u = y - mu_hat
    out = u[p:].copy()
    for j in range(1, p + 1):
        out -= beta[j - 1] * u[p - j: u.size - j]
    return out


def estimate_path(path, cfg, model=None):
    """Run the configured estimators on an observed path.

    Oracle methods require ``model`` (the true specification).  With
    ``method_mu = 'oracle'`` the location is mu + mu_shift/sqrt(n).
    """
    path.require_observed()
    if cfg.method_mu == "oracle":
        if model is None:
            raise ValueError("oracle estimation needs the true model")
        mu_hat = model.mu + cfg.mu_shift / np.sqrt(path.n)
    else:
        mu_hat = estimate_mu(path.y, cfg.method_mu, cfg.huber_k, cfg.tol)

    if cfg.method_beta == "oracle":
        if model is None:
            raise ValueError("oracle estimation needs the true model")
        beta_hat, converged, iterations = np.asarray(model.beta, dtype=float), True, 0
    else:
        beta_hat, converged, iterations = estimate_beta(
            path.y - mu_hat, path.p, cfg.method_beta, cfg.huber_k, cfg.tol, cfg.max_iter
        )
    return EstimateSet(
        mu_hat=float(mu_hat),
        beta_hat=beta_hat,
        method_mu=cfg.method_mu,
        method_beta=cfg.method_beta,
        converged=bool(converged),
        iterations=int(iterations),
    )
