"""Tests for the innovation distribution catalogue."""

import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from aredf.innovations import (
    Laplace,
    LocalMixture,
    Mixture,
    Normal,
    StudentT,
    contaminated_normal,
)

CATALOGUE = [
    Normal(),
    Normal(1.5),
    StudentT(5.0),
    StudentT(3.0),
    Laplace(),
    contaminated_normal(0.1, 3.0),
    Mixture((Normal(), Laplace(), StudentT(6.0)), (0.5, 0.3, 0.2)),
    LocalMixture(Normal(), StudentT(5.0), 100),
]

IDS = [
    "normal", "normal-1.5", "t5", "t3", "laplace", "contam-normal",
    "three-mixture", "local-mixture",
]


class TestNormalClosedForms:
    def test_cdf_at_zero(self):
        assert float(Normal().cdf(0.0)) == 0.5

    def test_pdf_at_zero(self):
        assert float(Normal().pdf(0.0)) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=1e-12)

    def test_pdf_deriv_at_zero(self):
        assert float(Normal().pdf_deriv(0.0)) == 0.0

    def test_cdf_matches_quadrature_oracle(self):
        # integral of the density over (-inf, -1]
        oracle, err = integrate.quad(Normal().pdf, -np.inf, -1.0)
        assert err < 1e-9
        assert float(Normal().cdf(-1.0)) == pytest.approx(oracle, abs=1e-8)

    def test_invalid_sigma_rejected(self):
        with pytest.raises(ValueError):
            Normal(0.0)
        with pytest.raises(ValueError):
            Normal(float("nan"))


@pytest.mark.parametrize("dist", CATALOGUE, ids=IDS)
class TestCatalogueShape:
    def test_cdf_monotone_with_limits(self, dist):
        grid = np.linspace(-50.0, 50.0, 801) * max(dist.stddev, 1.0)
        c = np.asarray(dist.cdf(grid))
        assert np.all(np.diff(c) >= -1e-15)
        assert c[0] < 1e-4 and c[-1] > 1.0 - 1e-4
        assert np.all((c >= 0.0) & (c <= 1.0))

    def test_pdf_nonnegative_and_integrates_to_one(self, dist):
        grid = np.linspace(-10.0, 10.0, 401) * max(dist.stddev, 1.0)
        assert np.all(np.asarray(dist.pdf(grid)) >= 0.0)
        w = 40.0 * max(dist.stddev, 1.0)
        total, _ = integrate.quad(lambda s: float(dist.pdf(s)), -w, w,
                                  points=[0.0], limit=300)
        assert 1.0 - 1e-4 <= total <= 1.0 + 1e-8

    def test_pdf_deriv_matches_finite_differences(self, dist):
        x = np.linspace(-6.0, 6.0, 121) * max(dist.stddev, 1.0)
        h = 1e-4
        fd = (np.asarray(dist.pdf(x + h)) - np.asarray(dist.pdf(x - h))) / (2.0 * h)
        assert np.max(np.abs(np.asarray(dist.pdf_deriv(x)) - fd)) < 1e-4

    def test_pdf_deriv_bounded(self, dist):
        x = np.linspace(-50.0, 50.0, 2001)
        assert np.all(np.isfinite(np.asarray(dist.pdf_deriv(x))))

    def test_quantile_cdf_roundtrip(self, dist):
        t = np.arange(1, 100) / 100.0
        q = dist.quantile(t)
        assert np.max(np.abs(np.asarray(dist.cdf(q)) - t)) < 1e-8

    def test_quantile_extremes(self, dist):
        assert dist.quantile(0.0) == -np.inf
        assert dist.quantile(1.0) == np.inf
        with pytest.raises(ValueError):
            dist.quantile(1.5)

    def test_kolmogorov_distance_of_draws(self, dist):
        # asymptotic 99% KS band for n = 1e5
        from aredf.edf import EdfView, ks_distance

        rng = np.random.default_rng(2024)
        view = EdfView(dist.sample(rng, 10 ** 5))
        assert ks_distance(view, dist) < 1.63 / math.sqrt(10 ** 5)

    def test_sample_matches_variance(self, dist):
        rng = np.random.default_rng(5)
        draws = dist.sample(rng, 2 * 10 ** 5)
        assert np.var(draws) == pytest.approx(dist.variance, rel=0.05)


class TestSampling:
    def test_zero_count_gives_empty(self):
        for dist in CATALOGUE:
            assert dist.sample(np.random.default_rng(0), 0).size == 0

    def test_same_seed_same_draws(self):
        for dist in CATALOGUE:
            a = dist.sample(np.random.default_rng(7), 500)
            b = dist.sample(np.random.default_rng(7), 500)
            assert np.array_equal(a, b)

    @pytest.mark.parametrize("dist", CATALOGUE, ids=IDS)
    def test_million_draw_mean_near_zero(self, dist):
        rng = np.random.default_rng(11)
        draws = dist.sample(rng, 10 ** 6)
        assert abs(float(np.mean(draws))) < 4.0 * dist.stddev / 10 ** 3

    def test_empirical_cdf_at_zero(self):
        rng = np.random.default_rng(13)
        draws = Normal().sample(rng, 10 ** 6)
        assert float(np.mean(draws <= 0.0)) == pytest.approx(0.5, abs=0.002)


@dataclass(frozen=True)
class _StubDist:
    """Fixed-cdf stand-in used to check mixture arithmetic in isolation."""

    value: float
    mean = 0.0
    variance = 1.0
    stddev = 1.0

    def cdf(self, x):
        return self.value

    def pdf(self, x):
        return 0.0

    def pdf_deriv(self, x):
        return 0.0

    def sample(self, rng, size):
        return np.zeros(int(size))


class TestLocalMixture:
    def test_cdf_is_weighted_average(self):
        # weight 1/sqrt(4) = 0.5: (1-0.5)*0.4 + 0.5*0.6 = 0.5
        mix = LocalMixture(_StubDist(0.4), _StubDist(0.6), 4)
        assert float(mix.cdf(0.123)) == pytest.approx(0.5, abs=1e-15)

    def test_cdf_matches_components_pointwise(self):
        g0, h, n = Normal(), StudentT(5.0), 50
        mix = LocalMixture(g0, h, n)
        w = 1.0 / math.sqrt(n)
        x = np.linspace(-4.0, 4.0, 101)
        expect = (1.0 - w) * np.asarray(g0.cdf(x)) + w * np.asarray(h.cdf(x))
        assert np.max(np.abs(np.asarray(mix.cdf(x)) - expect)) < 1e-15

    def test_variance_combines_components(self):
        g0, h, n = Normal(2.0), Laplace(0.5), 25
        mix = LocalMixture(g0, h, n)
        w = 1.0 / 5.0
        assert mix.variance == pytest.approx((1 - w) * 4.0 + w * 0.25, abs=1e-14)

    def test_weight_cap_enforced(self):
        with pytest.raises(ValueError):
            LocalMixture(Normal(), Laplace(), 4, amplify=3.0)

    def test_component_mean_must_be_zero(self):
        @dataclass(frozen=True)
        class Shifted:
            mean = 0.3
            variance = 1.0

        with pytest.raises(ValueError):
            LocalMixture(Normal(), Shifted(), 100)

    def test_collapsed_mixture_shares_sample_stream(self):
        mix = LocalMixture(Normal(), Normal(), 100)
        a = mix.sample(np.random.default_rng(3), 1000)
        b = Normal().sample(np.random.default_rng(3), 1000)
        assert np.array_equal(a, b)

    def test_amplified_mixture_couples_monotonically(self):
        # same stream: the amplified mixture swaps in strictly more h-draws
        g0, h = Normal(), Laplace()
        low = LocalMixture(g0, h, 400, amplify=1.0)
        high = LocalMixture(g0, h, 400, amplify=5.0)
        a = low.sample(np.random.default_rng(21), 4000)
        b = high.sample(np.random.default_rng(21), 4000)
        assert np.sum(a != b) > 0


class TestMixtureValidation:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            Mixture((Normal(), Laplace()), (0.5, 0.6))

    def test_fraction_range(self):
        with pytest.raises(ValueError):
            contaminated_normal(1.2, 3.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.001, max_value=0.999))
def test_quantile_roundtrip_property(t):
    for dist in (Normal(1.3), Laplace(0.7)):
        assert float(dist.cdf(dist.quantile(t))) == pytest.approx(t, abs=1e-8)
