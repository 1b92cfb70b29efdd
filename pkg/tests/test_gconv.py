"""Series engine: construction, evaluation, sampling, and the eCDF band."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from gammacross.errors import ConvergenceError, DomainError
from gammacross.gconv import (
    MAX_TERMS,
    TAIL_TARGET,
    EcdfBand,
    GammaComponent,
    GammaConvolution,
    ecdf_band,
    h1_closed,
    h2_closed,
    make_convolution,
)
from gammacross.specfun import reg_lower_inc_gamma

# mpmath (50 dps) value of P(0.001 X1 + X2 <= 1), X_i ~ gamma(0.5, 1): a deep
# scale ratio needing ~3e4 series terms, where naive weight accumulation
# floors out above the tail target and the build used to die at the term cap
STRESS_CDF_ORACLE = 0.842596899147632474149


class TestConstruction:
    def test_components_sorted_and_merged(self):
        gc = make_convolution(0.5, [2.0, 2.0, 5.0])
        assert [(c.shape, c.scale) for c in gc.components] == [(1.0, 2.0), (0.5, 5.0)]

    def test_supplements_add_shape(self):
        gc = make_convolution(1.0, [0.4, 1.0], supplements=[0, 1])
        assert [(c.shape, c.scale) for c in gc.components] == [(2.0, 0.4), (2.0, 1.0)]
        gc2 = make_convolution(1.0, [0.4, 1.0], supplements=[1, 1])
        assert [(c.shape, c.scale) for c in gc2.components] == [(1.0, 0.4), (3.0, 1.0)]

    def test_zero_weights_dropped(self):
        gc = make_convolution(2.0, [0.0, 1.5, 0.0])
        assert [(c.shape, c.scale) for c in gc.components] == [(2.0, 1.5)]

    def test_moments(self):
        gc = make_convolution(1.5, [0.5, 2.0])
        assert_allclose(gc.mean, 1.5 * 0.5 + 1.5 * 2.0)
        assert_allclose(gc.variance, 1.5 * 0.25 + 1.5 * 4.0)
        assert gc.total_shape == 3.0

    def test_domain(self):
        with pytest.raises(DomainError):
            make_convolution(0.0, [1.0])
        with pytest.raises(DomainError):
            make_convolution(1.0, [])
        with pytest.raises(DomainError):
            make_convolution(1.0, [-0.5, 1.0])
        with pytest.raises(DomainError):
            make_convolution(1.0, [0.0, 0.0])
        with pytest.raises(DomainError):
            make_convolution(1.0, [1.0], supplements=[3])
        with pytest.raises(DomainError):
            make_convolution(1.0, [0.0, 1.0], supplements=[0])
        with pytest.raises(DomainError):
            GammaComponent(1.0, -2.0)
        with pytest.raises(DomainError):
            GammaConvolution(())


class TestEvaluation:
    def test_single_component_reduction(self):
        gc = make_convolution(2.5, [1.7])
        for x in (0.1, 1.0, 4.0, 12.0):
            assert_allclose(float(gc.cdf(x)), reg_lower_inc_gamma(2.5, x / 1.7),
                            rtol=0, atol=1e-13)

    def test_exponential_pair_closed_form(self):
        for d in (0.1, 0.25, 0.4, 0.7, 0.9):
            xs = np.linspace(0.02, 12.0, 100)
            g1 = make_convolution(1.0, [d, 1.0])
            g2 = make_convolution(2.0, [d, 1.0])
            assert np.max(np.abs(g1.density(xs) - h1_closed(d, xs))) < 1e-12
            assert np.max(np.abs(g2.density(xs) - h2_closed(d, xs))) < 1e-12

    def test_laplace_ode_identity(self):
        # delta h1'(x) + h1(x) = e^-x, exactly, for the exponential pair
        for d in (0.25, 0.4, 0.7):
            gc = make_convolution(1.0, [d, 1.0])
            for x in (0.5, 1.0, 2.0):
                resid = d * gc.density(x, 1) + gc.density(x, 0) - math.exp(-x)
                assert abs(resid) < 1e-12

    def test_stress_scale_ratio(self):
        gc = make_convolution(0.5, [0.001, 1.0])
        assert_allclose(float(gc.cdf(1.0)), STRESS_CDF_ORACLE, rtol=0, atol=1e-12)

    def test_stress_series_converges_under_cap(self):
        # regression: compensated weight accumulation must reach the tail
        # target in ~3e4 terms; a plain running sum stalls at ~1 - 4e-14
        s = make_convolution(0.5, [0.001, 1.0])._series
        assert len(s.weights) < MAX_TERMS
        assert 0.0 <= s.tail <= TAIL_TARGET

    def test_underflow_raises(self):
        with pytest.raises(ConvergenceError):
            make_convolution(1.0, [1e-320, 1.0]).cdf(1.0)

    def test_cdf_shape_and_range(self):
        gc = make_convolution(0.8, [0.5, 1.5, 2.5])
        xs = np.geomspace(1e-6, 60.0, 300)
        vals = gc.cdf(xs)
        assert vals.shape == xs.shape
        assert np.all(np.diff(vals) >= 0.0)
        assert vals[0] >= 0.0 and vals[-1] <= 1.0
        assert float(gc.cdf(0.0)) == 0.0
        assert float(gc.cdf(-3.0)) == 0.0
        mat = gc.cdf(xs.reshape(30, 10))
        assert mat.shape == (30, 10)

    def test_normalization_and_mean_by_quadrature(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            n = int(rng.integers(2, 5))
            a = float(rng.uniform(0.6, 3.0))
            gc = make_convolution(a, rng.uniform(0.3, 3.0, n))
            hi = gc.quantile(1.0 - 1e-12)
            total, _ = quad(lambda t: gc.density(t), 0.0, hi, limit=200)
            assert abs(total - 1.0) < 1e-8
            mean, _ = quad(lambda t: t * gc.density(t), 0.0, hi, limit=200)
            assert abs(mean - gc.mean) < 1e-6 * gc.mean

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(5)
        w = rng.uniform(0.3, 3.0, 3)
        base = make_convolution(1.5, w)
        for c in (0.1, 3.0, 40.0):
            scaled = make_convolution(1.5, c * w)
            for x in (0.7, 2.7, 9.0):
                assert_allclose(float(scaled.cdf(c * x)), float(base.cdf(x)),
                                rtol=0, atol=1e-12)

    def test_permutation_invariance(self):
        a = make_convolution(0.9, [2.0, 0.5, 1.1])
        b = make_convolution(0.9, [1.1, 2.0, 0.5])
        assert a == b
        xs = np.linspace(0.1, 10.0, 50)
        assert np.array_equal(a.cdf(xs), b.cdf(xs))

    def test_density_derivatives_vs_finite_differences(self):
        gc = make_convolution(2.0, [0.5, 1.5])
        for x in (0.8, 2.0, 5.0):
            fd1 = (gc.density(x + 5e-6) - gc.density(x - 5e-6)) / 1e-5
            assert_allclose(float(gc.density(x, 1)), fd1, rtol=1e-6)
            fd2 = (gc.density(x + 1e-4, 1) - gc.density(x - 1e-4, 1)) / 2e-4
            assert_allclose(float(gc.density(x, 2)), fd2, rtol=1e-6)

    def test_single_gamma_mode_stationary(self):
        assert float(make_convolution(3.0, [1.0]).density(2.0, 1)) == pytest.approx(0.0, abs=1e-15)

    def test_evaluation_domain(self):
        gc = make_convolution(1.0, [1.0, 2.0])
        with pytest.raises(DomainError):
            gc.density(1.0, order=3)
        with pytest.raises(DomainError):
            gc.cdf(np.array([1.0, math.inf]))


class TestQuantile:
    def test_exponential_closed_form(self):
        gc = make_convolution(1.0, [1.0])
        assert_allclose(gc.quantile(1.0 - math.exp(-2.0)), 2.0, rtol=0, atol=1e-10)

    def test_roundtrip(self):
        gc = make_convolution(0.5, [0.4, 1.0, 2.2])
        for p in (1e-6, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0 - 1e-9):
            x = gc.quantile(p)
            assert abs(float(gc.cdf(x)) - p) <= 1e-10

    def test_monotone_over_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            gc = make_convolution(float(rng.uniform(0.5, 3.0)),
                                  rng.uniform(0.2, 3.0, int(rng.integers(1, 5))))
            assert gc.quantile(0.25) < gc.quantile(0.75)

    def test_domain(self):
        gc = make_convolution(1.0, [1.0])
        for p in (0.0, 1.0, -0.2, 1.7):
            with pytest.raises(DomainError):
                gc.quantile(p)


class TestSampling:
    def test_deterministic_given_seed(self):
        gc = make_convolution(0.5, [0.4, 1.1, 2.0])
        assert np.array_equal(gc.sample(2000, 123), gc.sample(2000, 123))
        assert not np.array_equal(gc.sample(2000, 123), gc.sample(2000, 124))

    def test_mean_within_standard_errors(self):
        gc = make_convolution(0.5, [0.4, 1.1, 2.0])
        n = 200_000
        draws = gc.sample(n, 77)
        se = math.sqrt(gc.variance / n)
        assert abs(draws.mean() - gc.mean) < 4.0 * se

    def test_shape_below_one_positive(self):
        draws = make_convolution(0.3, [1.0]).sample(5000, 9)
        assert np.all(draws > 0.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            make_convolution(1.0, [1.0]).sample(-1, 0)


class TestEcdfBand:
    def test_half_width_formula(self):
        band = ecdf_band(np.arange(1.0, 11.0), confidence=0.95)
        assert_allclose(band.half_width, math.sqrt(math.log(2.0 / 0.05) / 20.0), rtol=1e-14)
        big = ecdf_band(np.arange(10 ** 6, dtype=float), confidence=0.99)
        assert_allclose(big.half_width, 0.001627623630718729, rtol=0, atol=1e-17)

    def test_ecdf_basics(self):
        band = ecdf_band(np.array([3.0, 1.0, 2.0]))
        assert band.n == 3
        assert band.ecdf(0.5) == 0.0
        assert band.ecdf(1.0) == pytest.approx(1.0 / 3.0)
        assert band.ecdf(3.0) == 1.0
        assert band.ecdf(2.5) == pytest.approx(2.0 / 3.0)

    def test_sup_deviation_hand_case(self):
        # samples 1,2,3 against F(x) = x/4: worst corner is |3/3 - 3/4| = 1/4
        band = ecdf_band(np.array([1.0, 2.0, 3.0]))
        f = band.sorted_samples / 4.0
        assert_allclose(band.sup_deviation(f), 0.25, rtol=1e-14)

    def test_band_contains_true_cdf(self):
        gc = make_convolution(1.5, [0.5, 1.5])
        band = ecdf_band(gc.sample(100_000, 2024), confidence=0.99)
        assert band.contains(gc.cdf(band.sorted_samples))

    def test_grid_bound_dominates_exact_sup(self):
        gc = make_convolution(1.5, [0.5, 1.5])
        samples = gc.sample(50_000, 11)
        band = ecdf_band(samples, confidence=0.99)
        exact = band.sup_deviation(gc.cdf(band.sorted_samples))
        grid = np.unique(np.quantile(samples, np.linspace(0.0, 1.0, 2001)))
        bound = band.sup_deviation_bound(grid, gc.cdf(grid))
        assert bound >= exact
        # quantile grids keep the bracketing slack near one cell of mass
        assert bound <= exact + 2.0 / 2000.0

    def test_domain(self):
        with pytest.raises(DomainError):
            ecdf_band(np.array([]))
        with pytest.raises(DomainError):
            ecdf_band(np.array([1.0, math.nan]))
        with pytest.raises(DomainError):
            ecdf_band(np.array([1.0]), confidence=1.0)
        band = ecdf_band(np.array([1.0, 2.0]))
        with pytest.raises(DomainError):
            band.sup_deviation(np.array([0.1, 0.2, 0.3]))
        with pytest.raises(DomainError):
            band.sup_deviation_bound(np.array([2.0, 1.0]), np.array([0.1, 0.2]))


class TestClosedFormReferences:
    def test_h1_h2_frozen_values(self):
        # mpmath (50 dps) at delta = 0.4
        assert_allclose(h1_closed(0.4, 0.25), 0.4058989242540243771476, rtol=1e-14)
        assert_allclose(h1_closed(0.4, 1.0), 0.4763240709125725440433, rtol=1e-14)
        assert_allclose(h1_closed(0.4, 3.0), 0.0820566399961935156604, rtol=1e-14)
        assert_allclose(h2_closed(0.4, 0.25), 0.01054559303994243286773, rtol=1e-13)
        assert_allclose(h2_closed(0.4, 1.0), 0.1914032862924530042511, rtol=1e-13)
        assert_allclose(h2_closed(0.4, 3.0), 0.2371531839363347698861, rtol=1e-13)

    def test_domain(self):
        for bad in (0.0, 1.0, 1.5):
            with pytest.raises(DomainError):
                h1_closed(bad, 1.0)
            with pytest.raises(DomainError):
                h2_closed(bad, 1.0)
