"""TOML configuration parsing and validation for the CLI.

Every subcommand has a fixed schema; unknown keys are hard errors (the
usual typo trap), and invalid values raise :class:`ConfigError` naming the
offending field path and the violated constraint.  Builders return the
assembled objects together with a fully resolved echo dict that run outputs
embed for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .ar_process import ARModelSpec, ModelError
from .estimation import EstimatorConfig
from .expansion import (
    DriftingInnovations,
    ExperimentConfig,
    FixedInnovations,
    SweepConfig,
)
from .innovations import Laplace, Mixture, Normal, StudentT, contaminated_normal
from .normality import ChiSquareConfig
from .outliers import (
    AtomMixture,
    CauchyOutliers,
    NormalOutliers,
    PointMass,
    UniformOutliers,
)

__all__ = ["ConfigError", "Overrides", "load_toml"]


class ConfigError(Exception):
    """Configuration file or value problem; maps to exit code 2."""


@dataclass(frozen=True)
class Overrides:
    """CLI flags that take precedence over the config file."""

    seed: int | None = None
    threads: int | None = None
    replications: int | None = None


def load_toml(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None


def _check_keys(table, allowed, path):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")


def _table(raw, key, path="", required=True, default=None):
    loc = f"{path}.{key}" if path else key
    if key not in raw:
        if required:
            raise ConfigError(f"{loc}: missing required section")
        return dict(default) if default is not None else None
    value = raw[key]
    if not isinstance(value, dict):
        raise ConfigError(f"{loc}: expected a table")
    return value


def _number(table, key, path, default=None, required=False, minimum=None,
            maximum=None, strict_min=None):
    loc = f"{path}.{key}"
    if key not in table:
        if required:
            raise ConfigError(f"{loc}: missing required value")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{loc}: expected a number")
    v = float(v)
    if minimum is not None and v < minimum:
        raise ConfigError(f"{loc}: must be >= {minimum}, got {v}")
    if strict_min is not None and v <= strict_min:
        raise ConfigError(f"{loc}: must be > {strict_min}, got {v}")
    if maximum is not None and v > maximum:
        raise ConfigError(f"{loc}: must be <= {maximum}, got {v}")
    return v


def _integer(table, key, path, default=None, required=False, minimum=None):
    loc = f"{path}.{key}"
    if key not in table:
        if required:
            raise ConfigError(f"{loc}: missing required value")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{loc}: expected an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{loc}: must be >= {minimum}, got {v}")
    return int(v)


def _string(table, key, path, default=None, required=False, choices=None):
    loc = f"{path}.{key}"
    if key not in table:
        if required:
            raise ConfigError(f"{loc}: missing required value")
        return default
    v = table[key]
    if not isinstance(v, str):
        raise ConfigError(f"{loc}: expected a string")
    if choices is not None and v not in choices:
        raise ConfigError(f"{loc}: must be one of {sorted(choices)}, got {v!r}")
    return v


def _number_list(table, key, path, required=False, default=None, minimum=None):
    loc = f"{path}.{key}"
    if key not in table:
        if required:
            raise ConfigError(f"{loc}: missing required value")
        return default
    v = table[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{loc}: expected a nonempty list of numbers")
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{loc}[{i}]: expected a number")
        if minimum is not None and item < minimum:
            raise ConfigError(f"{loc}[{i}]: must be >= {minimum}, got {item}")
        out.append(float(item))
    return out


def _integer_list(table, key, path, required=False, default=None, minimum=None):
    loc = f"{path}.{key}"
    if key not in table:
        if required:
            raise ConfigError(f"{loc}: missing required value")
        return default
    v = table[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{loc}: expected a nonempty list of integers")
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, int):
            raise ConfigError(f"{loc}[{i}]: expected an integer")
        if minimum is not None and item < minimum:
            raise ConfigError(f"{loc}[{i}]: must be >= {minimum}, got {item}")
        out.append(int(item))
    return out


# ---------------------------------------------------------------------------
# distribution blocks
# ---------------------------------------------------------------------------

def parse_innovation(table, path):
    kind = _string(table, "dist", path, required=True)
    if kind == "normal":
        _check_keys(table, {"dist", "sigma"}, path)
        sigma = _number(table, "sigma", path, default=1.0, strict_min=0.0)
        return Normal(sigma), {"dist": "normal", "sigma": sigma}
    if kind == "student-t":
        _check_keys(table, {"dist", "df"}, path)
        df = _number(table, "df", path, required=True, strict_min=2.0)
        return StudentT(df), {"dist": "student-t", "df": df}
    if kind == "laplace":
        _check_keys(table, {"dist", "sigma"}, path)
        sigma = _number(table, "sigma", path, default=1.0, strict_min=0.0)
        return Laplace(sigma), {"dist": "laplace", "sigma": sigma}
    if kind == "contaminated-normal":
        _check_keys(table, {"dist", "fraction", "sigma_wide", "sigma"}, path)
        fraction = _number(table, "fraction", path, required=True, minimum=0.0, maximum=1.0)
        sigma_wide = _number(table, "sigma_wide", path, required=True, strict_min=0.0)
        sigma = _number(table, "sigma", path, default=1.0, strict_min=0.0)
        return (contaminated_normal(fraction, sigma_wide, sigma),
                {"dist": "contaminated-normal", "fraction": fraction,
                 "sigma_wide": sigma_wide, "sigma": sigma})
    if kind == "mixture":
        _check_keys(table, {"dist", "components", "weights"}, path)
        comps_raw = table.get("components")
        weights = _number_list(table, "weights", path, required=True, minimum=0.0)
        if not isinstance(comps_raw, list) or not comps_raw:
            raise ConfigError(f"{path}.components: expected a nonempty list of tables")
        comps, echoes = [], []
        for i, sub in enumerate(comps_raw):
            if not isinstance(sub, dict):
                raise ConfigError(f"{path}.components[{i}]: expected a table")
            c, e = parse_innovation(sub, f"{path}.components[{i}]")
            comps.append(c)
            echoes.append(e)
        try:
            dist = Mixture(tuple(comps), tuple(weights))
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return dist, {"dist": "mixture", "components": echoes, "weights": weights}
    raise ConfigError(
        f"{path}.dist: unknown distribution {kind!r} (expected normal, student-t, "
        "laplace, contaminated-normal, or mixture)"
    )


def parse_innovations_block(table, path):
    """Fixed law or a local mixture drifting toward its base law."""
    if _string(table, "dist", path, required=True) == "local-mixture":
        _check_keys(table, {"dist", "g0", "h", "amplify"}, path)
        g0_tab = _table(table, "g0", path)
        h_tab = _table(table, "h", path)
        amplify = _number(table, "amplify", path, default=1.0, strict_min=0.0)
        g0, g0_echo = parse_innovation(g0_tab, f"{path}.g0")
        h, h_echo = parse_innovation(h_tab, f"{path}.h")
        echo = {"dist": "local-mixture", "g0": g0_echo, "h": h_echo, "amplify": amplify}
        return DriftingInnovations(g0, h, amplify), echo
    dist, echo = parse_innovation(table, path)
    return FixedInnovations(dist), echo


def parse_outliers(table, path):
    kind = _string(table, "dist", path, required=True)
    if kind == "point":
        _check_keys(table, {"dist", "value"}, path)
        value = _number(table, "value", path, default=0.0)
        return PointMass(value), {"dist": "point", "value": value}
    if kind == "atoms":
        _check_keys(table, {"dist", "values", "weights"}, path)
        values = _number_list(table, "values", path, required=True)
        weights = _number_list(table, "weights", path, required=True, minimum=0.0)
        try:
            dist = AtomMixture(tuple(values), tuple(weights))
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return dist, {"dist": "atoms", "values": values, "weights": weights}
    if kind == "normal":
        _check_keys(table, {"dist", "mean", "sd"}, path)
        mean = _number(table, "mean", path, default=0.0)
        sd = _number(table, "sd", path, default=1.0, strict_min=0.0)
        return NormalOutliers(mean, sd), {"dist": "normal", "mean": mean, "sd": sd}
    if kind == "cauchy":
        _check_keys(table, {"dist", "loc", "scale"}, path)
        loc = _number(table, "loc", path, default=0.0)
        scale = _number(table, "scale", path, default=1.0, strict_min=0.0)
        return CauchyOutliers(loc, scale), {"dist": "cauchy", "loc": loc, "scale": scale}
    if kind == "uniform":
        _check_keys(table, {"dist", "low", "high"}, path)
        low = _number(table, "low", path, required=True)
        high = _number(table, "high", path, required=True)
        if low >= high:
            raise ConfigError(f"{path}: need low < high")
        return UniformOutliers(low, high), {"dist": "uniform", "low": low, "high": high}
    raise ConfigError(
        f"{path}.dist: unknown outlier law {kind!r} (expected point, atoms, normal, "
        "cauchy, or uniform)"
    )


# ---------------------------------------------------------------------------
# shared blocks
# ---------------------------------------------------------------------------

def parse_model(raw):
    table = _table(raw, "model")
    _check_keys(table, {"p", "beta", "mu"}, "model")
    beta = _number_list(table, "beta", "model", required=True)
    p = _integer(table, "p", "model", default=len(beta), minimum=1)
    if p != len(beta):
        raise ConfigError(f"model.p: p={p} does not match len(beta)={len(beta)}")
    mu = _number(table, "mu", "model", default=0.0)
    try:
        model = ARModelSpec(tuple(beta), mu)
    except ModelError as exc:
        raise ConfigError(f"model.beta: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None
    return model, {"p": p, "beta": beta, "mu": mu}


def parse_estimators(raw, allow_oracle=True):
    table = _table(raw, "estimators", required=False, default={})
    _check_keys(
        table,
        {"method_mu", "method_beta", "huber_k", "tol", "max_iter", "mu_shift"},
        "estimators",
    )
    kwargs = dict(
        method_mu=_string(table, "method_mu", "estimators", default="huber-m",
                          choices={"median", "huber-m", "oracle"}),
        method_beta=_string(table, "method_beta", "estimators", default="gm-mallows",
                            choices={"ls", "gm-mallows", "oracle"}),
        huber_k=_number(table, "huber_k", "estimators", default=1.345, strict_min=0.0),
        tol=_number(table, "tol", "estimators", default=1e-8, strict_min=0.0),
        max_iter=_integer(table, "max_iter", "estimators", default=100, minimum=1),
        mu_shift=_number(table, "mu_shift", "estimators", default=0.0),
    )
    if not allow_oracle and "oracle" in (kwargs["method_mu"], kwargs["method_beta"]):
        raise ConfigError("estimators: oracle methods need simulated truth; "
                          "not available for this subcommand")
    try:
        cfg = EstimatorConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"estimators: {exc}") from None
    return cfg, kwargs


def parse_pi(raw, required):
    table = _table(raw, "contamination", required=required, default={})
    if table is None:
        table = {}
    _check_keys(table, {"gamma", "pi"}, "contamination")
    gamma = _number(table, "gamma", "contamination", default=0.0, minimum=0.0)
    pi_tab = _table(table, "pi", "contamination", required=False)
    if pi_tab is None:
        if gamma > 0.0:
            raise ConfigError("contamination.pi: required when gamma > 0")
        return gamma, PointMass(0.0), {"gamma": gamma, "pi": {"dist": "point", "value": 0.0}}
    pi, pi_echo = parse_outliers(pi_tab, "contamination.pi")
    return gamma, pi, {"gamma": gamma, "pi": pi_echo}


def parse_run(raw, overrides):
    table = _table(raw, "run", required=False, default={})
    _check_keys(table, {"master_seed", "burn_in", "threads"}, "run")
    seed = _integer(table, "master_seed", "run", default=0, minimum=0)
    burn_in = _integer(table, "burn_in", "run", default=None, minimum=0)
    threads = _integer(table, "threads", "run", default=0, minimum=0)
    if overrides.seed is not None:
        seed = overrides.seed
    if overrides.threads is not None:
        threads = overrides.threads
    echo = {"master_seed": seed, "threads": threads}
    if burn_in is not None:
        echo["burn_in"] = burn_in
    return seed, burn_in, threads, echo


# ---------------------------------------------------------------------------
# subcommand schemas
# ---------------------------------------------------------------------------

def build_verify_config(raw, overrides=Overrides()):
    _check_keys(raw, {"model", "innovations", "contamination", "estimators",
                      "sweep", "run"}, "config")
    model, model_echo = parse_model(raw)
    innov, innov_echo = parse_innovations_block(_table(raw, "innovations"), "innovations")
    est, est_echo = parse_estimators(raw)

    table = _table(raw, "sweep")
    _check_keys(table, {"n", "gamma", "x_grid", "replications", "remainder",
                        "gamma_max"}, "sweep")
    n_values = _integer_list(table, "n", "sweep", required=True, minimum=2)
    gammas = _number_list(table, "gamma", "sweep", required=True, minimum=0.0)
    x_grid = _number_list(table, "x_grid", "sweep")
    if x_grid is None:
        sd = innov.reference.stddev
        x_grid = [m * sd for m in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    replications = _integer(table, "replications", "sweep", required=True, minimum=1)
    if overrides.replications is not None:
        replications = overrides.replications
    remainder = _string(table, "remainder", "sweep", default="edf",
                        choices={"edf", "symmetrized"})
    gamma_max = _number(table, "gamma_max", "sweep", minimum=0.0)

    needs_pi = any(g > 0.0 for g in gammas)
    _gamma_unused, pi, cont_echo = parse_pi(raw, required=needs_pi)
    cont_echo.pop("gamma", None)

    seed, burn_in, threads, run_echo = parse_run(raw, overrides)
    for m in n_values:
        if m < model.p + 1:
            raise ConfigError(f"sweep.n: every n must be >= p+1 = {model.p + 1}")
    try:
        sweep = SweepConfig(tuple(n_values), tuple(gammas), tuple(x_grid),
                            replications, remainder, gamma_max)
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from None
    cfg = ExperimentConfig(model=model, innovations=innov, outliers=pi,
                           estimators=est, sweep=sweep, master_seed=seed,
                           burn_in=burn_in, threads=threads)
    echo = {
        "model": model_echo,
        "innovations": innov_echo,
        "contamination": cont_echo,
        "estimators": est_echo,
        "sweep": {
            "n": n_values, "gamma": gammas, "x_grid": x_grid,
            "replications": replications, "remainder": remainder,
            "gamma_max": gamma_max if gamma_max is not None else max(gammas),
        },
        "run": run_echo,
    }
    return cfg, echo


def build_simulate_config(raw, overrides=Overrides()):
    _check_keys(raw, {"model", "innovations", "contamination", "simulate", "run"},
                "config")
    model, model_echo = parse_model(raw)
    innov, innov_echo = parse_innovations_block(_table(raw, "innovations"), "innovations")
    gamma, pi, cont_echo = parse_pi(raw, required=False)
    table = _table(raw, "simulate")
    _check_keys(table, {"n"}, "simulate")
    n = _integer(table, "n", "simulate", required=True, minimum=model.p + 1)
    seed, burn_in, threads, run_echo = parse_run(raw, overrides)
    echo = {
        "model": model_echo,
        "innovations": innov_echo,
        "contamination": cont_echo,
        "simulate": {"n": n},
        "run": run_echo,
    }
    return (model, innov, gamma, pi, n, seed, burn_in), echo


def build_estimate_config(raw, overrides=Overrides()):
    _check_keys(raw, {"estimators", "estimate"}, "config")
    est, est_echo = parse_estimators(raw, allow_oracle=False)
    table = _table(raw, "estimate")
    _check_keys(table, {"p"}, "estimate")
    p = _integer(table, "p", "estimate", required=True, minimum=1)
    echo = {"estimators": est_echo, "estimate": {"p": p}}
    return (est, p), echo


def build_shift_config(raw, overrides=Overrides()):
    _check_keys(raw, {"model", "innovations", "innovations0", "contamination",
                      "shift", "run"}, "config")
    model, model_echo = parse_model(raw)
    g, g_echo = parse_innovation(_table(raw, "innovations"), "innovations")
    g0_tab = _table(raw, "innovations0", required=False)
    if g0_tab is not None:
        g0, g0_echo = parse_innovation(g0_tab, "innovations0")
    else:
        g0, g0_echo = g, g_echo
    _gamma, pi, cont_echo = parse_pi(raw, required=True)
    cont_echo.pop("gamma", None)

    table = _table(raw, "shift")
    _check_keys(table, {"x_grid", "x_min", "x_max", "points", "method", "mc_draws"},
                "shift")
    x_grid = _number_list(table, "x_grid", "shift")
    if x_grid is None:
        x_min = _number(table, "x_min", "shift", default=-3.0)
        x_max = _number(table, "x_max", "shift", default=3.0)
        points = _integer(table, "points", "shift", default=61, minimum=2)
        if x_min >= x_max:
            raise ConfigError("shift.x_min: need x_min < x_max")
        step = (x_max - x_min) / (points - 1)
        x_grid = [x_min + i * step for i in range(points)]
    method = _string(table, "method", "shift", default="quadrature",
                     choices={"quadrature", "monte-carlo"})
    mc_draws = _integer(table, "mc_draws", "shift", default=10 ** 6, minimum=2)
    seed, _burn, _threads, run_echo = parse_run(raw, overrides)
    echo = {
        "model": model_echo,
        "innovations": g_echo,
        "innovations0": g0_echo,
        "contamination": cont_echo,
        "shift": {"x_grid": x_grid, "method": method, "mc_draws": mc_draws},
        "run": run_echo,
    }
    return (model, g, g0, pi, x_grid, method, mc_draws, seed), echo


def build_power_config(raw, overrides=Overrides()):
    _check_keys(raw, {"model", "innovations", "alternative", "contamination",
                      "estimators", "test", "sweep", "run"}, "config")
    model, model_echo = parse_model(raw)
    g0, g0_echo = parse_innovation(_table(raw, "innovations"), "innovations")
    alt = _table(raw, "alternative")
    _check_keys(alt, {"h", "amplify"}, "alternative")
    h, h_echo = parse_innovation(_table(alt, "h", "alternative"), "alternative.h")
    amplify = _number_list(alt, "amplify", "alternative", default=[1.0], minimum=0.0)

    est, est_echo = parse_estimators(raw)
    test_tab = _table(raw, "test", required=False, default={})
    _check_keys(test_tab, {"cells", "scale", "alpha"}, "test")
    try:
        test_cfg = ChiSquareConfig(
            cells=_integer(test_tab, "cells", "test", default=8, minimum=4),
            scale=_string(test_tab, "scale", "test", default="mad",
                          choices={"sd", "mad"}),
            alpha=_number(test_tab, "alpha", "test", default=0.05,
                          strict_min=0.0, maximum=1.0 - 1e-12),
        )
    except ValueError as exc:
        raise ConfigError(f"test: {exc}") from None

    table = _table(raw, "sweep")
    _check_keys(table, {"n", "gamma", "replications"}, "sweep")
    n_values = _integer_list(table, "n", "sweep", required=True,
                             minimum=10 * test_cfg.cells)
    gammas = _number_list(table, "gamma", "sweep", default=[0.0], minimum=0.0)
    replications = _integer(table, "replications", "sweep", required=True, minimum=1)
    if overrides.replications is not None:
        replications = overrides.replications

    needs_pi = any(g > 0.0 for g in gammas)
    _gamma, pi, cont_echo = parse_pi(raw, required=needs_pi)
    cont_echo.pop("gamma", None)
    seed, burn_in, threads, run_echo = parse_run(raw, overrides)
    echo = {
        "model": model_echo,
        "innovations": g0_echo,
        "alternative": {"h": h_echo, "amplify": amplify},
        "contamination": cont_echo,
        "estimators": est_echo,
        "test": {"cells": test_cfg.cells, "scale": test_cfg.scale,
                 "alpha": test_cfg.alpha},
        "sweep": {"n": n_values, "gamma": gammas, "replications": replications},
        "run": run_echo,
    }
    return (model, g0, h, amplify, pi, est, test_cfg, n_values, gammas,
            replications, seed, burn_in, threads), echo
