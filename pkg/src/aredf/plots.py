"""Figure rendering for experiment reports.

All figures are written to files (vector PDF), never displayed; the Agg
backend keeps this safe on headless machines.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "save_remainder_figure",
    "save_power_figure",
    "save_shift_figure",
    "save_path_figure",
]


def save_remainder_figure(report, path):
    """Remainder distribution against n: median and 5-95% band per (gamma, x)."""
    gammas = sorted({c.gamma for c in report.cells})
    xs = sorted({c.x for c in report.cells})
    ns = sorted({c.n for c in report.cells})
    fig, axes = plt.subplots(
        1, len(gammas), figsize=(4.2 * len(gammas), 3.4),
        sharey=True, squeeze=False, constrained_layout=True,
    )
    for ax, gamma in zip(axes[0], gammas):
        for x in xs:
            cells = {c.n: c for c in report.cells if c.gamma == gamma and c.x == x}
            med = [cells[n].quantiles["0.5"] for n in ns]
            lo = [cells[n].quantiles["0.05"] for n in ns]
            hi = [cells[n].quantiles["0.95"] for n in ns]
            line, = ax.plot(ns, med, marker="o", label=f"x = {x:g}")
            ax.fill_between(ns, lo, hi, alpha=0.15, color=line.get_color())
        ax.axhline(0.0, color="black", lw=0.8)
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_title(f"intensity = {gamma:g}")
    axes[0][0].set_ylabel("remainder")
    axes[0][-1].legend(fontsize=8)
    fig.suptitle(f"{report.kind} remainder vs n")
    fig.savefig(path)
    plt.close(fig)
    return path


def save_power_figure(rows, path):
    """Rejection rate vs n per scenario label, with 95% binomial bars."""
    labels = sorted({(r.label, r.gamma) for r in rows})
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    for label, gamma in labels:
        pts = sorted([r for r in rows if r.label == label and r.gamma == gamma],
                     key=lambda r: r.n)
        ns = [r.n for r in pts]
        rates = [r.rate for r in pts]
        errs = [1.96 * r.std_error for r in pts]
        name = label if gamma == 0.0 else f"{label} (intensity {gamma:g})"
        ax.errorbar(ns, rates, yerr=errs, marker="o", capsize=3, label=name)
    ax.axhline(0.05, color="black", lw=0.8, ls="--")
    ax.set_xlabel("n")
    ax.set_ylabel("rejection rate")
    ax.set_title("empirical level / power")
    ax.legend(fontsize=8)
    fig.savefig(path)
    plt.close(fig)
    return path


def save_shift_figure(table_rows, path):
    xs = [r["x"] for r in table_rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    ax.plot(xs, [r["delta"] for r in table_rows], label="shift")
    ax.plot(xs, [r["delta_0"] for r in table_rows], ls="--", label="base shift")
    ax.plot(xs, [r["delta_sym"] for r in table_rows], ls=":", label="symmetrized")
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("shift value")
    ax.set_title("contamination shift functional")
    ax.legend(fontsize=8)
    fig.savefig(path)
    plt.close(fig)
    return path


def save_path_figure(sample_path, path):
    """Observed series with contaminated points highlighted."""
    t = sample_path.t
    fig, ax = plt.subplots(figsize=(7.2, 3.6), constrained_layout=True)
    ax.plot(t, sample_path.y, lw=0.7, label="observed")
    hit = np.asarray(sample_path.z, dtype=bool)
    if hit.any():
        ax.plot(t[hit], sample_path.y[hit], "rx", ms=5, label="contaminated")
    ax.set_xlabel("t")
    ax.set_ylabel("y")
    ax.set_title("simulated path")
    ax.legend(fontsize=8)
    fig.savefig(path)
    plt.close(fig)
    return path
