"""Tests for the expansion remainder operations and the sweep engine."""

import math

import numpy as np
import pytest

from aredf.ar_process import ARModelSpec, ContaminationSpec, contaminate, simulate_clean
from aredf.estimation import EstimatorConfig, estimate_path
from aredf.expansion import (
    DriftingInnovations,
    ExperimentConfig,
    FixedInnovations,
    SweepConfig,
    _summarize_cell,
    check_symmetric,
    drift_identity_table,
    expansion_remainder,
    run_experiment,
    symmetrized_remainder,
)
from aredf.innovations import Normal, StudentT
from aredf.outliers import NormalOutliers, PointMass
from aredf.report import expansion_report_dict

MODEL = ARModelSpec((0.5,), mu=1.0)
ORACLE = EstimatorConfig(method_mu="oracle", method_beta="oracle")


def _simulate(n, seed, intensity=0.0, pi=None, dist=None, model=MODEL):
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    path = simulate_clean(model, dist or Normal(), n, rng)
    return contaminate(path, ContaminationSpec(intensity, pi or PointMass(0.0)), rng)


class TestSingleShotRemainders:
    def test_oracle_clean_remainder_is_exactly_zero(self):
        for seed in range(5):
            path = _simulate(400, (101, seed))
            est = estimate_path(path, ORACLE, MODEL)
            for x in (-1.0, 0.0, 1.0):
                r = expansion_remainder(path, est, x, MODEL, Normal(), 0.0, PointMass(0.0))
                assert r == 0.0
                rs = symmetrized_remainder(path, est, x, MODEL, Normal(), 0.0, PointMass(0.0))
                assert rs == 0.0

    def test_injected_location_error_cancels_on_average(self):
        # oracle beta, mu_hat = mu + 1/sqrt(n): drift correction absorbs the
        # induced EDF displacement to first order
        cfg = EstimatorConfig(method_mu="oracle", method_beta="oracle", mu_shift=1.0)
        vals = np.empty(2000)
        for r in range(vals.size):
            path = _simulate(1000, (103, r))
            est = estimate_path(path, cfg, MODEL)
            vals[r] = expansion_remainder(path, est, 0.0, MODEL, Normal(), 0.0,
                                          PointMass(0.0), shift=0.0)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean()) < 3.0 * se

    def test_contamination_shift_absorbs_point_outliers(self):
        # oracle estimates isolate the contamination term against its shift value
        pi = PointMass(1.0)
        vals = np.empty(2000)
        for r in range(vals.size):
            path = _simulate(4000, (107, r), intensity=2.0, pi=pi)
            est = estimate_path(path, ORACLE, MODEL)
            vals[r] = expansion_remainder(path, est, 0.0, MODEL, Normal(), 2.0, pi)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean()) < 3.0 * se

    def test_symmetrized_requires_symmetric_reference(self):
        class Asymmetric:
            stddev = 1.0

            def cdf(self, x):
                from scipy import stats
                return stats.norm.cdf(np.asarray(x) - 0.3)

        with pytest.raises(ValueError, match="symmetric"):
            check_symmetric(Asymmetric())

    def test_symmetrized_drops_location_drift(self):
        # deliberately biased location: plain EDF gap keeps a drift of about
        # g(1) * (1 - b); the symmetrized gap does not
        cfg = EstimatorConfig(method_mu="oracle", method_beta="oracle", mu_shift=1.0)
        raw = np.empty(1500)
        sym = np.empty(1500)
        n = 2000
        for r in range(raw.size):
            path = _simulate(n, (109, r))
            est = estimate_path(path, cfg, MODEL)
            eh_gap = expansion_remainder(path, est, 1.0, MODEL, Normal(), 0.0,
                                         PointMass(0.0), shift=0.0)
            drift = float(Normal().pdf(1.0)) * MODEL.ar_poly_at_one * 1.0
            raw[r] = eh_gap + drift  # un-corrected EDF displacement
            sym[r] = symmetrized_remainder(path, est, 1.0, MODEL, Normal(), 0.0,
                                           PointMass(0.0), sym_shift=0.0)
        assert abs(sym.mean()) < 3.0 * sym.std(ddof=1) / math.sqrt(sym.size)
        target = float(Normal().pdf(1.0)) * MODEL.ar_poly_at_one
        assert abs(raw.mean() - target) < 3.0 * raw.std(ddof=1) / math.sqrt(raw.size)


class TestDriftingInnovations:
    def test_collapsed_mixture_matches_fixed_run_bitwise(self):
        sweep = SweepConfig((300,), (0.0, 1.5), (0.0, 1.0), 60)
        base = dict(model=MODEL, outliers=NormalOutliers(0.0, 3.0),
                    estimators=EstimatorConfig(), sweep=sweep, master_seed=5)
        fixed = run_experiment(ExperimentConfig(innovations=FixedInnovations(Normal()), **base))
        collapsed = run_experiment(ExperimentConfig(
            innovations=DriftingInnovations(Normal(), Normal()), **base))
        for key in fixed.values:
            assert np.array_equal(fixed.values[key], collapsed.values[key])

    def test_local_mixture_remainder_centers_on_zero(self):
        # planted 1/sqrt(n) location error: the base-density drift coefficient
        # must absorb it even though the draws come from the mixture
        descriptor = DriftingInnovations(Normal(), StudentT(5.0))
        cfg = EstimatorConfig(method_mu="oracle", method_beta="oracle", mu_shift=1.0)
        vals = np.empty(2000)
        n = 4000
        for r in range(vals.size):
            path = _simulate(n, (113, r), dist=descriptor.resolve(n))
            est = estimate_path(path, cfg, MODEL)
            vals[r] = expansion_remainder(path, est, 0.0, MODEL, Normal(), 0.0,
                                          PointMass(0.0), shift=0.0)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean()) <= 3.0 * se

    def test_local_mixture_with_contamination(self):
        descriptor = DriftingInnovations(Normal(), StudentT(5.0))
        pi = NormalOutliers(0.0, 3.0)
        from aredf.shift import shift_value
        shift = shift_value(0.0, MODEL.beta, Normal(), pi).value
        vals = np.empty(2000)
        n = 4000
        for r in range(vals.size):
            path = _simulate(n, (127, r), intensity=2.0, pi=pi,
                             dist=descriptor.resolve(n))
            est = estimate_path(path, ORACLE, MODEL)
            vals[r] = expansion_remainder(path, est, 0.0, MODEL, Normal(), 2.0, pi,
                                          shift=shift)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean()) < 3.0 * se


class TestDriftIdentity:
    def test_collapse_targets_zero(self):
        rows = drift_identity_table(Normal(), Normal(), 500, (0.2, 0.5, 0.8), 800,
                                    master_seed=3)
        for row in rows:
            assert row.target == pytest.approx(0.0, abs=1e-8)
            assert row.abs_error < 3.0 * row.mc_std_error + 1e-8

    def test_median_target_is_zero_for_symmetric_h(self):
        rows = drift_identity_table(Normal(), StudentT(5.0), 400, (0.5,), 400,
                                    master_seed=4)
        assert rows[0].target == pytest.approx(0.0, abs=1e-9)

    def test_frozen_target_upper_decile(self):
        # H = N(0, sd = sqrt(2)): H(q_0.9) - 0.9, recomputed from the normal CDF
        rows = drift_identity_table(Normal(), Normal(math.sqrt(2.0)), 1000, (0.9,),
                                    600, master_seed=5)
        assert rows[0].target == pytest.approx(-0.08241664139292582, abs=1e-9)
        assert rows[0].abs_error < 3.0 * rows[0].mc_std_error

    def test_t_range_validated(self):
        with pytest.raises(ValueError):
            drift_identity_table(Normal(), Normal(), 100, (0.0, 0.5), 10)


class TestRunExperiment:
    def _config(self, **kw):
        base = dict(
            model=MODEL,
            innovations=FixedInnovations(Normal()),
            outliers=PointMass(0.0),
            estimators=ORACLE,
            sweep=SweepConfig((120,), (0.0,), (-1.0, 0.0, 1.0), 1),
            master_seed=9,
        )
        base.update(kw)
        return ExperimentConfig(**base)

    def test_single_cell_oracle_clean_all_zero(self):
        report = run_experiment(self._config())
        assert all(c.mean_remainder == 0.0 for c in report.cells)
        assert np.all(report.values[(120, 0.0)] == 0.0)

    def test_same_seed_identical_report(self):
        a = expansion_report_dict(run_experiment(self._config(
            sweep=SweepConfig((100, 200), (0.0, 1.0), (0.0,), 10),
            outliers=NormalOutliers(0.0, 3.0), estimators=EstimatorConfig())),
            include_runtime=False)
        b = expansion_report_dict(run_experiment(self._config(
            sweep=SweepConfig((100, 200), (0.0, 1.0), (0.0,), 10),
            outliers=NormalOutliers(0.0, 3.0), estimators=EstimatorConfig())),
            include_runtime=False)
        assert a == b

    def test_thread_count_does_not_change_results(self):
        cfg1 = self._config(sweep=SweepConfig((100,), (0.0, 1.0), (0.0,), 12),
                            outliers=NormalOutliers(0.0, 3.0),
                            estimators=EstimatorConfig(), threads=1)
        cfg2 = self._config(sweep=SweepConfig((100,), (0.0, 1.0), (0.0,), 12),
                            outliers=NormalOutliers(0.0, 3.0),
                            estimators=EstimatorConfig(), threads=2)
        a = expansion_report_dict(run_experiment(cfg1), include_runtime=False)
        b = expansion_report_dict(run_experiment(cfg2), include_runtime=False)
        assert a == b

    def test_engine_agrees_with_single_shot_recomputation(self):
        pi = NormalOutliers(0.0, 3.0)
        cfg = self._config(
            sweep=SweepConfig((250,), (2.0,), (-1.0, 0.5), 8),
            outliers=pi, estimators=EstimatorConfig(),
        )
        report = run_experiment(cfg)
        stored = report.values[(250, 2.0)]
        shift_by_x = {row["x"]: row["shift"] for row in report.shift_table}
        for r in range(8):
            path = _simulate(250, (9, 0, 0, r), intensity=2.0, pi=pi)
            est = estimate_path(path, EstimatorConfig(), MODEL)
            for xi, x in enumerate((-1.0, 0.5)):
                again = expansion_remainder(path, est, x, MODEL, Normal(), 2.0, pi,
                                            shift=shift_by_x[x])
                assert abs(again - stored[r, xi]) < 1e-12

    def test_aggregates_invariant_under_replication_permutation(self):
        rng = np.random.default_rng(0)
        vals = rng.normal(size=60)
        edf = rng.normal(size=60)
        sym = rng.normal(size=60)
        perm = rng.permutation(60)
        a = _summarize_cell(100, 0.0, 0.0, 60, 0, True, vals, edf, sym)
        b = _summarize_cell(100, 0.0, 0.0, 60, 0, True, vals[perm], edf[perm], sym[perm])
        assert a == b

    def test_exceedance_monotone_in_threshold(self):
        cfg = self._config(sweep=SweepConfig((150,), (1.0,), (0.0,), 50),
                           outliers=NormalOutliers(0.0, 3.0),
                           estimators=EstimatorConfig())
        report = run_experiment(cfg)
        for c in report.cells:
            assert c.p_exceed["0.1"] >= c.p_exceed["0.25"] >= c.p_exceed["0.5"]

    def test_sweep_validation(self):
        with pytest.raises(ValueError):
            SweepConfig((100,), (-0.5,), (0.0,), 10)
        with pytest.raises(ValueError):
            SweepConfig((100,), (2.0,), (0.0,), 10, gamma_cap=1.0)
        with pytest.raises(ValueError):
            SweepConfig((100,), (0.0,), (0.0,), 10, remainder="other")
