"""Brownian-pair estimator and its expectation formulas.

The expectation formulas are cross-checked against a direct double-loop
evaluation of the weighted-moment sum under the coupling covariance model
Cov(X_s, Y_t) = min(s, t) * rho_{min(s, t)}, written independently of the
grouped rearrangement used in the implementation.
"""

import numpy as np
import pytest

from dyncorr import (
    BmEstimatorParams,
    CorrelationProfile,
    DegenerateVariance,
    DomainError,
    TimeGrid,
    estimate_bm,
    expected_gamma_bm,
    expected_ratio_q,
    expected_sigma_sq_bm,
    gamma_hat_bm,
    rho_hat_bm,
    sigma_sq_hat_bm,
    simulate_bm_batch,
    simulate_bm_pair,
)

CONST_HALF = CorrelationProfile("constant", (0.5,))


def brute_force_expected_gamma(rho, u, q, p, T):
    """Direct weighted-moment sum, no algebraic regrouping."""

    def cov(s, t):
        m = min(s, t)
        return m * rho[m - 1]

    total = 0.0
    for v in range(1, T + 1):
        if v == u:
            continue
        term = (
            v ** (2 * q) * cov(u, u)
            - v ** (q - p) * (cov(u, v) + cov(v, u))
            + v ** (-2 * p) * cov(v, v)
        )
        total += term / (u - v) ** 2
    return total / (T - 1)


def brute_force_expected_sigma_sq(u, q, p, T):
    return brute_force_expected_gamma(np.ones(T), u, q, p, T)


class TestParams:
    def test_negative_exponents_rejected(self):
        with pytest.raises(DomainError):
            BmEstimatorParams(-0.5, 1.0)
        with pytest.raises(DomainError):
            BmEstimatorParams(0.5, -1.0)

    def test_consistency_range(self):
        assert BmEstimatorParams(0.5, 1.0).in_consistency_range()
        assert not BmEstimatorParams(0.5, 0.5).in_consistency_range()
        assert not BmEstimatorParams(0.0, 1.0).in_consistency_range()

    def test_variance_decay_range(self):
        assert BmEstimatorParams(0.25, 0.75).in_variance_decay_range()
        assert not BmEstimatorParams(0.0, 0.75).in_variance_decay_range()
        assert not BmEstimatorParams(0.25, 0.5).in_variance_decay_range()


class TestPointEstimator:
    def test_matches_direct_sum(self):
        rng = np.random.default_rng(0)
        T, u, q, p = 25, 7, 0.5, 1.0
        x, y = rng.standard_normal((2, T))
        expected = 0.0
        for v in range(1, T + 1):
            if v == u:
                continue
            dx = v ** q * x[u - 1] - v ** -p * x[v - 1]
            dy = v ** q * y[u - 1] - v ** -p * y[v - 1]
            expected += dx * dy / (u - v) ** 2
        expected /= T - 1
        params = BmEstimatorParams(q, p)
        assert gamma_hat_bm(x, y, u=u, params=params) == pytest.approx(expected, rel=1e-13)

    def test_sigma_sq_is_gamma_with_substituted_series(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(30)
        params = BmEstimatorParams(0.3, 0.8)
        g = gamma_hat_bm(x, x, u=5, params=params)
        assert sigma_sq_hat_bm(x, u=5, params=params) == pytest.approx(g)

    def test_batch_matches_loop(self):
        x, y = simulate_bm_batch(CONST_HALF, TimeGrid(40), 4, reps=6)
        params = BmEstimatorParams(0.5, 1.0)
        batch = gamma_hat_bm(x, y, u=10, params=params)
        singles = [gamma_hat_bm(x[i], y[i], u=10, params=params) for i in range(6)]
        assert np.allclose(batch, singles, rtol=1e-14)

    def test_rho_hat_within_unit_interval(self):
        x, y = simulate_bm_batch(CONST_HALF, TimeGrid(60), 8, reps=200)
        rho = rho_hat_bm(x, y, u=12, params=BmEstimatorParams(0.5, 1.0))
        assert np.all(np.abs(rho) <= 1.0 + 1e-12)

    def test_swap_symmetry_and_scale_invariance(self):
        pair = simulate_bm_pair(CONST_HALF, TimeGrid(50), 3)
        params = BmEstimatorParams(0.5, 1.0)
        rho = rho_hat_bm(pair.x, pair.y, u=9, params=params)
        assert rho_hat_bm(pair.y, pair.x, u=9, params=params) == pytest.approx(rho)
        assert rho_hat_bm(3.7 * pair.x, 0.2 * pair.y, u=9, params=params) == (
            pytest.approx(rho)
        )

    def test_zero_path_raises_degenerate(self):
        zeros = np.zeros(20)
        with pytest.raises(DegenerateVariance):
            rho_hat_bm(zeros, zeros, u=4, params=BmEstimatorParams(0.5, 1.0))

    def test_estimate_bm_bundles_components(self):
        pair = simulate_bm_pair(CONST_HALF, TimeGrid(30), 6)
        params = BmEstimatorParams(0.5, 1.0)
        series = estimate_bm(pair, 8, params)
        assert series.gamma_hat == pytest.approx(
            gamma_hat_bm(pair, u=8, params=params)
        )
        assert series.rho_hat == pytest.approx(
            series.gamma_hat / np.sqrt(series.sigma_x_sq_hat * series.sigma_y_sq_hat)
        )


class TestExpectationFormulas:
    @pytest.mark.parametrize("q,p", [(0.5, 1.0), (0.0, 0.0), (0.3, 0.8), (1.0, 2.0)])
    @pytest.mark.parametrize("profile", [
        CONST_HALF,
        CorrelationProfile("capped", (0.5, 10.0)),
        CorrelationProfile("linear", (0.05, 0.004)),
    ])
    def test_expected_gamma_matches_brute_force(self, q, p, profile):
        T, t = 60, 12
        params = BmEstimatorParams(q, p)
        brute = brute_force_expected_gamma(profile.rho(T), t, q, p, T)
        assert expected_gamma_bm(profile, t, params, T) == pytest.approx(brute, rel=1e-12)

    @pytest.mark.parametrize("q,p", [(0.5, 1.0), (0.0, 0.0), (0.3, 0.8)])
    def test_expected_sigma_sq_matches_brute_force(self, q, p):
        T, t = 60, 12
        params = BmEstimatorParams(q, p)
        brute = brute_force_expected_sigma_sq(t, q, p, T)
        assert expected_sigma_sq_bm(t, params, T) == pytest.approx(brute, rel=1e-12)

    def test_smallest_grid_value(self):
        # T=2, t=1, q=p=0: E(X_1 - X_2)^2 = Var(increment) = 1
        assert expected_sigma_sq_bm(1, BmEstimatorParams(0.0, 0.0), 2) == (
            pytest.approx(1.0)
        )

    def test_sigma_sq_equals_gamma_at_full_correlation(self):
        ones = CorrelationProfile("constant", (1.0,))
        params = BmEstimatorParams(0.5, 1.0)
        g = expected_gamma_bm(ones, 10, params, 200)
        assert expected_sigma_sq_bm(10, params, 200) == pytest.approx(g, rel=1e-13)

    def test_ratio_is_exact_for_constant_profiles(self):
        for q, p in [(0.5, 1.0), (0.0, 0.0), (0.3, 2.0)]:
            params = BmEstimatorParams(q, p)
            ratio = expected_ratio_q(CONST_HALF, 10, params, 500)
            assert abs(ratio - 0.5) < 1e-12

    def test_ratio_trend_for_time_varying_profile(self):
        capped = CorrelationProfile("capped", (0.5, 10.0))
        params = BmEstimatorParams(0.5, 1.0)
        gaps = [abs(expected_ratio_q(capped, 10, params, T) - 0.5)
                for T in (1000, 10000)]
        assert gaps[1] < gaps[0]

    def test_mc_mean_matches_oracle(self):
        profile = CorrelationProfile("capped", (0.4, 8.0))
        T, t, reps = 300, 8, 3000
        params = BmEstimatorParams(0.5, 1.0)
        x, y = simulate_bm_batch(profile, TimeGrid(T), 17, reps)
        g = gamma_hat_bm(x, y, u=t, params=params)
        target = expected_gamma_bm(profile, t, params, T)
        se = g.std(ddof=1) / np.sqrt(reps)
        assert abs(g.mean() - target) < 4 * se
