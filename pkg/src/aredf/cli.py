"""Command-line entry point.

Subcommands: simulate, estimate, shift, verify-expansion, test-normality,
power-curve.  Exit codes: 0 success, 2 configuration error, 3 runtime
error.  All outputs are written to files; plots are never displayed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import config as cfgmod
from . import report as reportmod
from .ar_process import ContaminationSpec, contaminate, path_to_csv, read_observations, simulate_clean
from .config import ConfigError, Overrides
from .estimation import estimate_beta, estimate_mu, residuals
from .expansion import DriftingInnovations, FixedInnovations, run_experiment
from .normality import ChiSquareConfig, PowerScenario, chi_square_normality, run_level_power
from .shift import shift_value, symmetrized_shift


def _overrides(args):
    return Overrides(
        seed=getattr(args, "seed", None),
        threads=getattr(args, "threads", None),
        replications=getattr(args, "replications", None),
    )


def _cmd_simulate(args):
    raw = cfgmod.load_toml(args.config)
    (model, innov, gamma, pi, n, seed, burn_in), echo = cfgmod.build_simulate_config(
        raw, _overrides(args))
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
    path = simulate_clean(model, innov.resolve(n), n, rng, burn_in)
    path = contaminate(path, ContaminationSpec(gamma, pi), rng)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "path.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        path_to_csv(path, fh)
    reportmod.dump_json({"master_seed": seed, "config": echo},
                        os.path.join(args.out, "meta.json"))
    if not args.no_plots:
        from . import plots
        plots.save_path_figure(path, os.path.join(args.out, "sample_path.pdf"))
    print(f"wrote {csv_path}")
    return 0


def _cmd_estimate(args):
    raw = cfgmod.load_toml(args.config)
    (est_cfg, p), echo = cfgmod.build_estimate_config(raw, _overrides(args))
    with open(args.input, encoding="utf-8") as fh:
        y, presample = read_observations(fh)
    if presample and presample != p:
        raise ConfigError(
            f"estimate.p: CSV has {presample} pre-sample rows but p = {p}")
    if y.size < 3 * p + 10:
        raise ConfigError(f"input series too short for AR({p}) estimation")
    mu_hat = estimate_mu(y, est_cfg.method_mu, est_cfg.huber_k, est_cfg.tol)
    beta_hat, converged, iterations = estimate_beta(
        y - mu_hat, p, est_cfg.method_beta, est_cfg.huber_k, est_cfg.tol,
        est_cfg.max_iter)
    resid = residuals(y, mu_hat, beta_hat)
    os.makedirs(args.out, exist_ok=True)
    out = {
        "config": echo,
        "mu_hat": float(mu_hat),
        "beta_hat": [float(b) for b in beta_hat],
        "method_mu": est_cfg.method_mu,
        "method_beta": est_cfg.method_beta,
        "converged": bool(converged),
        "iterations": int(iterations),
        "n": int(resid.size),
        "p": p,
    }
    reportmod.dump_json(out, os.path.join(args.out, "estimates.json"))
    with open(os.path.join(args.out, "residuals.csv"), "w", encoding="utf-8") as fh:
        fh.write("residual\n")
        for v in resid:
            fh.write(repr(float(v)) + "\n")
    print(json.dumps(out, indent=2))
    return 0


def _cmd_shift(args):
    raw = cfgmod.load_toml(args.config)
    (model, g, g0, pi, x_grid, method, mc_draws, seed), echo = \
        cfgmod.build_shift_config(raw, _overrides(args))
    rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    rows = []
    for x in x_grid:
        d = shift_value(x, model.beta, g, pi, method, mc_draws, rng)
        d0 = (d if g0 is g else
              shift_value(x, model.beta, g0, pi, method, mc_draws, rng))
        ds = symmetrized_shift(x, model.beta, g0, pi, method, mc_draws, rng)
        rows.append({
            "x": float(x),
            "delta": d.value, "delta_0": d0.value, "delta_sym": ds.value,
            "delta_se": d.std_error, "delta_0_se": d0.std_error,
            "delta_sym_se": ds.std_error,
            "method": d.method, "fell_back": d.fell_back,
        })
    written = reportmod.emit_shift_outputs(rows, echo, seed, args.out,
                                           make_plots=not args.no_plots)
    with open(written[1], encoding="utf-8") as fh:
        print(fh.read(), end="")
    return 0


def _cmd_verify(args):
    raw = cfgmod.load_toml(args.config)
    cfg, echo = cfgmod.build_verify_config(raw, _overrides(args))
    cells = len(cfg.sweep.n_values) * len(cfg.sweep.gamma_values)
    print(f"planned work: {cells} cells x {cfg.sweep.replications} replications "
          f"= {cells * cfg.sweep.replications} paths", file=sys.stderr)
    report = run_experiment(cfg, config_echo=echo)
    written = reportmod.emit_expansion_outputs(report, args.out,
                                               make_plots=not args.no_plots)
    bad = [c for c in report.cells if not c.usable]
    if bad:
        print(f"warning: {len(bad)} cell rows exceeded the 2% invalid-replication "
              "limit and are flagged unusable", file=sys.stderr)
    print("\n".join(written))
    return 0


def _cmd_test_normality(args):
    values = []
    with open(args.input, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            token = line.strip().split(",")[0]
            if not token:
                continue
            try:
                values.append(float(token))
            except ValueError:
                if i == 0:
                    continue  # header row
                raise ConfigError(f"{args.input}:{i + 1}: not a number: {token!r}")
    if not values:
        raise ConfigError(f"{args.input}: no residuals found")
    try:
        cfg = ChiSquareConfig(cells=args.cells, scale=args.scale, alpha=args.alpha)
        rep = chi_square_normality(np.asarray(values), cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    payload = reportmod.normality_report_dict(rep)
    text = json.dumps(payload, indent=2)
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_power(args):
    raw = cfgmod.load_toml(args.config)
    (model, g0, h, amplify, pi, est, test_cfg, n_values, gammas, replications,
     seed, burn_in, threads), echo = cfgmod.build_power_config(raw, _overrides(args))
    scenarios = [PowerScenario("null", FixedInnovations(g0))]
    for a in amplify:
        label = "local" if a == 1.0 else f"local-x{a:g}"
        scenarios.append(PowerScenario(label, DriftingInnovations(g0, h, a)))
    started = time.perf_counter()
    rows = run_level_power(model, scenarios, pi, n_values, gammas, replications,
                           test_cfg, est, seed, burn_in, threads)
    runtime = {"total_seconds": time.perf_counter() - started}
    written = reportmod.emit_power_outputs(rows, echo, seed, args.out,
                                           make_plots=not args.no_plots,
                                           runtime=runtime)
    print("\n".join(written))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aredf",
        description="Simulation lab for residual EDFs in contaminated autoregressions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True, out=True):
        if config:
            p.add_argument("--config", required=True, help="TOML configuration file")
        if out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override run.master_seed")
        p.add_argument("--no-plots", action="store_true", help="skip figure output")

    p = sub.add_parser("simulate", help="simulate one contaminated path to CSV")
    add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="estimate mean/coefficients from a path CSV")
    p.add_argument("--input", required=True, help="path CSV (from simulate)")
    add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("shift", help="tabulate the contamination shift functional")
    add_common(p)
    p.set_defaults(func=_cmd_shift)

    p = sub.add_parser("verify-expansion",
                       help="Monte Carlo sweep checking the EDF expansion remainder")
    add_common(p)
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (0 = all cores)")
    p.add_argument("--replications", type=int, default=None,
                   help="override sweep.replications")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("test-normality",
                       help="chi-square normality test on a residual CSV")
    p.add_argument("--input", required=True, help="CSV with one column of residuals")
    p.add_argument("--out", default=None, help="optional JSON output file")
    p.add_argument("--cells", type=int, default=8)
    p.add_argument("--scale", choices=["sd", "mad"], default="mad")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_test_normality)

    p = sub.add_parser("power-curve",
                       help="level/power of the normality test under local alternatives")
    add_common(p)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--replications", type=int, default=None)
    p.set_defaults(func=_cmd_power)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 3


def run():
    raise SystemExit(main())


if __name__ == "__main__":
    run()
