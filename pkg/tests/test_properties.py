"""Property-based checks over generated inputs."""

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dyncorr import (
    BmEstimatorParams,
    CorrelationProfile,
    TimeGrid,
    gamma_hat_bm,
    r_from_rho,
    rho_from_r,
    sigma_sq_hat_bm,
    simulate_bm_pair,
)

correlations = st.floats(-0.99, 0.99)


class TestTransformProperties:
    @given(rho=correlations, sigma=st.floats(0.01, 1.0), t=st.integers(1, 50))
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, rho, sigma, t):
        # strongly negative values are unreachable by any geometric pair
        assume(1.0 + rho * np.expm1(sigma ** 2 * t) > 1e-9)
        assert abs(rho_from_r(r_from_rho(rho, sigma, t), sigma, t) - rho) <= 1e-9

    @given(sigma=st.floats(0.01, 1.0), t=st.integers(1, 50))
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_correlation(self, sigma, t):
        values = [rho_from_r(r, sigma, t) for r in (-0.5, 0.0, 0.5, 1.0)]
        assert all(a < b for a, b in zip(values, values[1:]))


class TestProfileProperties:
    @given(c=correlations, t0=st.floats(1.0, 20.0))
    @settings(max_examples=100, deadline=None)
    def test_capped_profiles_are_always_feasible(self, c, t0):
        prof = CorrelationProfile("capped", (c, t0))
        r = prof.increments(40)
        assert np.all(np.abs(r) <= 1.0)

    @given(c=correlations)
    @settings(max_examples=50, deadline=None)
    def test_constant_increments_reproduce_profile(self, c):
        prof = CorrelationProfile("constant", (c,))
        t = np.arange(1, 31)
        assert np.allclose(np.cumsum(prof.increments(30)), t * c, atol=1e-12)


class TestEstimatorProperties:
    @given(
        c=correlations,
        q=st.floats(0.0, 1.5),
        p=st.floats(0.0, 2.0),
        seed=st.integers(0, 2 ** 32 - 1),
        t=st.integers(1, 30),
    )
    @settings(max_examples=100, deadline=None)
    def test_cauchy_schwarz_bound(self, c, q, p, seed, t):
        prof = CorrelationProfile("constant", (c,))
        pair = simulate_bm_pair(prof, TimeGrid(30), seed)
        params = BmEstimatorParams(q, p)
        g = gamma_hat_bm(pair, u=t, params=params)
        sx = sigma_sq_hat_bm(pair.x, u=t, params=params)
        sy = sigma_sq_hat_bm(pair.y, u=t, params=params)
        assert g * g <= sx * sy * (1 + 1e-10)
