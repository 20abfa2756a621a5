"""Tests for the symmetrized chi-square normality test."""

import numpy as np
import pytest
from scipy import special

from aredf.ar_process import ARModelSpec
from aredf.estimation import EstimatorConfig
from aredf.expansion import DriftingInnovations, FixedInnovations
from aredf.innovations import Laplace, Normal
from aredf.normality import (
    ChiSquareConfig,
    PowerScenario,
    chi_square_normality,
    chi_square_statistic,
    fitted_scale,
    run_level_power,
)
from aredf.outliers import PointMass


class TestStatistic:
    def test_zero_when_counts_match(self):
        obs = np.full(8, 12.5)
        assert chi_square_statistic(obs, obs) == 0.0

    def test_known_value(self):
        assert chi_square_statistic([12.0, 8.0], [10.0, 10.0]) == pytest.approx(0.8)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            chi_square_statistic([1.0, 2.0], [1.0])

    def test_nonpositive_expected(self):
        with pytest.raises(ValueError):
            chi_square_statistic([1.0], [0.0])


def _brute_force_statistic(resids, cells, scale_method):
    """Independent recomputation: raw signed-cell counts, mirror averaging."""
    r = np.asarray(resids, dtype=float)
    n = r.size
    sigma = fitted_scale(r, scale_method)
    half = cells // 2
    pos_edges = [sigma * special.ndtri(0.5 + j / cells) for j in range(1, half)]
    edges = [-np.inf] + [-e for e in reversed(pos_edges)] + [0.0] + pos_edges + [np.inf]
    raw = np.zeros(cells)
    for value in r:
        for c in range(cells):
            if edges[c] < value <= edges[c + 1]:
                raw[c] += 1
                break
    mirrored = 0.5 * (raw + raw[::-1])
    expected = np.full(cells, n / cells)
    return float(np.sum((mirrored - expected) ** 2 / expected))


class TestChiSquareNormality:
    def test_matches_brute_force_on_small_samples(self):
        rng = np.random.default_rng(2)
        for scale in ("mad", "sd"):
            for trial in range(5):
                resids = rng.standard_normal(90)
                rep = chi_square_normality(resids, ChiSquareConfig(8, scale))
                oracle = _brute_force_statistic(resids, 8, scale)
                assert rep.statistic == pytest.approx(oracle, abs=1e-10)

    def test_observed_counts_sum_to_n(self):
        rng = np.random.default_rng(3)
        rep = chi_square_normality(rng.standard_normal(200))
        assert float(np.sum(rep.observed)) == pytest.approx(200.0, abs=1e-9)
        assert float(np.sum(rep.expected)) == pytest.approx(200.0, abs=1e-9)
        assert rep.df == 3

    def test_constant_residuals_blow_up(self):
        rep = chi_square_normality(np.full(100, 10.0))
        assert rep.statistic > 100.0
        assert rep.p_value < 1e-10
        assert rep.reject

    def test_sign_flip_invariance_exact(self):
        rng = np.random.default_rng(5)
        resids = rng.standard_t(6, 300)
        a = chi_square_normality(resids)
        b = chi_square_normality(-resids)
        assert a.statistic == b.statistic

    @pytest.mark.parametrize("factor", [2.0, 0.5])
    def test_scale_equivariance_power_of_two_exact(self, factor):
        # powers of two scale the whole pipeline without any rounding
        rng = np.random.default_rng(7)
        resids = rng.standard_normal(400)
        for scale in ("mad", "sd"):
            a = chi_square_normality(resids, ChiSquareConfig(8, scale))
            b = chi_square_normality(factor * resids, ChiSquareConfig(8, scale))
            assert a.statistic == b.statistic

    def test_scale_equivariance_generic_factor(self):
        rng = np.random.default_rng(9)
        resids = rng.standard_normal(400)
        a = chi_square_normality(resids)
        b = chi_square_normality(3.0 * resids)
        assert a.statistic == pytest.approx(b.statistic, abs=1e-9)

    def test_sample_size_precondition(self):
        with pytest.raises(ValueError):
            chi_square_normality(np.random.default_rng(0).standard_normal(70),
                                 ChiSquareConfig(8))

    def test_edges_are_sign_symmetric_quantiles(self):
        rng = np.random.default_rng(11)
        rep = chi_square_normality(rng.standard_normal(500))
        z = special.ndtri(0.5 + np.arange(1, 4) / 8.0)
        assert np.allclose(rep.edges, rep.scale_estimate * z, atol=1e-12)
        assert np.all(np.diff(rep.edges) > 0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ChiSquareConfig(cells=7)
        with pytest.raises(ValueError):
            ChiSquareConfig(scale="iqr")
        with pytest.raises(ValueError):
            ChiSquareConfig(alpha=1.5)


class TestLevelPower:
    def _rows(self, scenarios, reps=40, seed=3):
        return run_level_power(
            ARModelSpec((0.5,), 1.0), scenarios, PointMass(0.0), [400], [0.0],
            reps, ChiSquareConfig(), EstimatorConfig(), master_seed=seed,
        )

    def test_rows_are_well_formed(self):
        rows = self._rows([PowerScenario("null", FixedInnovations(Normal()))])
        assert len(rows) == 1
        row = rows[0]
        assert row.label == "null"
        assert 0.0 <= row.rate <= 1.0
        assert row.rejections <= row.replications
        assert row.invalid == 0

    def test_paired_rerun_is_deterministic(self):
        scenarios = [
            PowerScenario("null", FixedInnovations(Normal())),
            PowerScenario("local", DriftingInnovations(Normal(), Laplace())),
        ]
        a = self._rows(scenarios)
        b = self._rows(scenarios)
        assert [(r.label, r.rate) for r in a] == [(r.label, r.rate) for r in b]

    def test_collapsed_alternative_matches_null_exactly(self):
        # H = G0 shares the sample stream, so the paired rates coincide
        rows = self._rows([
            PowerScenario("null", FixedInnovations(Normal())),
            PowerScenario("collapse", DriftingInnovations(Normal(), Normal())),
        ])
        assert rows[0].rate == rows[1].rate
