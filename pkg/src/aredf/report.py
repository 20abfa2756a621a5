"""Result serialization: JSON reports and delimited summaries.

JSON carries full float precision (shortest round-trip representation, so
re-reading a report reproduces every value exactly); CSV files are rounded
to 6 significant digits, use '.' as the decimal separator, ',' as the
delimiter, and always start with a header row.  Runtime metadata lives in
a dedicated "runtime" field so that determinism checks can ignore it.
"""

from __future__ import annotations

import json
import os

__all__ = [
    "dump_json",
    "write_csv",
    "expansion_report_dict",
    "emit_expansion_outputs",
    "power_rows_dict",
    "emit_power_outputs",
    "emit_shift_outputs",
    "normality_report_dict",
]

SUMMARY_COLUMNS = [
    "n", "gamma", "x", "mean_R", "sd_R",
    "p_exceed_0.1", "p_exceed_0.25", "p_exceed_0.5", "n_invalid",
]


def dump_json(obj, path):
    text = json.dumps(obj, indent=2, allow_nan=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")
    return path


def _fmt(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def expansion_report_dict(report, include_values=False, include_runtime=True):
    cells = []
    for c in report.cells:
        cells.append({
            "n": c.n,
            "gamma": c.gamma,
            "x": c.x,
            "replications": c.replications,
            "invalid": c.invalid,
            "usable": c.usable,
            "mean_remainder": c.mean_remainder,
            "sd_remainder": c.sd_remainder,
            "quantiles": c.quantiles,
            "p_exceed": c.p_exceed,
            "mean_edf_diff": c.mean_edf_diff,
            "sd_edf_diff": c.sd_edf_diff,
            "mean_sym_diff": c.mean_sym_diff,
            "sd_sym_diff": c.sd_sym_diff,
        })
    out = {
        "kind": report.kind,
        "master_seed": report.master_seed,
        "config": report.config,
        "planned": report.planned,
        "shift_table": report.shift_table,
        "cells": cells,
    }
    if include_values:
        out["replication_values"] = {
            f"n={n},gamma={g}": [list(map(float, row)) for row in vals]
            for (n, g), vals in report.values.items()
        }
    if include_runtime:
        out["runtime"] = report.runtime
    return out


def emit_expansion_outputs(report, out_dir, make_plots=True, include_values=False):
    """Write report.json, summary.csv, and (optionally) the remainder figure."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    written.append(dump_json(
        expansion_report_dict(report, include_values=include_values),
        os.path.join(out_dir, "report.json"),
    ))
    rows = [
        [c.n, c.gamma, c.x, c.mean_remainder, c.sd_remainder,
         c.p_exceed["0.1"], c.p_exceed["0.25"], c.p_exceed["0.5"], c.invalid]
        for c in report.cells
    ]
    written.append(write_csv(os.path.join(out_dir, "summary.csv"),
                             SUMMARY_COLUMNS, rows))
    if make_plots:
        from . import plots
        written.append(plots.save_remainder_figure(
            report, os.path.join(out_dir, "remainder_vs_n.pdf")))
    return written


def power_rows_dict(rows):
    return [
        {
            "label": r.label, "n": r.n, "gamma": r.gamma,
            "replications": r.replications, "invalid": r.invalid,
            "rejections": r.rejections, "rate": r.rate,
            "std_error": r.std_error,
        }
        for r in rows
    ]


def emit_power_outputs(rows, echo, master_seed, out_dir, make_plots=True,
                       runtime=None):
    os.makedirs(out_dir, exist_ok=True)
    written = []
    payload = {
        "master_seed": master_seed,
        "config": echo,
        "rows": power_rows_dict(rows),
    }
    if runtime is not None:
        payload["runtime"] = runtime
    written.append(dump_json(payload, os.path.join(out_dir, "report.json")))
    written.append(write_csv(
        os.path.join(out_dir, "power.csv"),
        ["label", "n", "gamma", "replications", "invalid", "rejections",
         "rate", "std_error"],
        [[r.label, r.n, r.gamma, r.replications, r.invalid, r.rejections,
          r.rate, r.std_error] for r in rows],
    ))
    if make_plots:
        from . import plots
        written.append(plots.save_power_figure(
            rows, os.path.join(out_dir, "power_curve.pdf")))
    return written


def emit_shift_outputs(table_rows, echo, master_seed, out_dir, make_plots=True):
    """``table_rows``: list of dicts with x, delta, delta0, delta_sym (+ errors)."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    payload = {"master_seed": master_seed, "config": echo, "rows": table_rows}
    written.append(dump_json(payload, os.path.join(out_dir, "report.json")))
    header = ["x", "delta", "delta_0", "delta_sym", "delta_se", "delta_0_se",
              "delta_sym_se"]
    rows = [
        [r["x"], r["delta"], r["delta_0"], r["delta_sym"],
         "" if r.get("delta_se") is None else r["delta_se"],
         "" if r.get("delta_0_se") is None else r["delta_0_se"],
         "" if r.get("delta_sym_se") is None else r["delta_sym_se"]]
        for r in table_rows
    ]
    written.append(write_csv(os.path.join(out_dir, "shift.csv"), header, rows))
    if make_plots:
        from . import plots
        written.append(plots.save_shift_figure(
            table_rows, os.path.join(out_dir, "shift_functional.pdf")))
    return written


def normality_report_dict(rep):
    return {
        "statistic": rep.statistic,
        "df": rep.df,
        "p_value": rep.p_value,
        "reject": rep.reject,
        "alpha": rep.alpha,
        "n": rep.n,
        "cells": rep.cells,
        "scale_method": rep.scale_method,
        "scale_estimate": rep.scale_estimate,
        "edges": [float(e) for e in rep.edges],
        "observed": [float(o) for o in rep.observed],
        "expected": [float(e) for e in rep.expected],
    }
