import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import roughbessel.fbm as fbm_mod
from roughbessel._validation import DomainError
from roughbessel.fbm import FgnMethod, MethodError, fbm_cov, fgn_autocov, sample_fbm, sample_fgn

mpmath = pytest.importorskip("mpmath")

# 2**-0.4, evaluated with mpmath at 40 digits
TWO_POW_M04 = 0.7578582832551990411736299


def _mp_gamma(k, h):
    mpmath.mp.dps = 50
    k, h = mpmath.mpf(int(k)), mpmath.mpf(h)
    return float((abs(k + 1) ** (2 * h) - 2 * k ** (2 * h) + abs(k - 1) ** (2 * h)) / 2)


class TestCovariances:
    @pytest.mark.parametrize("t,h", [(0.5, 0.1), (1.0, 0.3), (3.7, 0.8)])
    def test_diagonal(self, t, h):
        assert fbm_cov(t, t, h) == pytest.approx(t ** (2 * h), rel=1e-15)

    def test_brownian_case(self):
        assert fbm_cov(2.0, 1.0, 0.5) == 1.0

    def test_rough_case(self):
        assert fbm_cov(2.0, 1.0, 0.3) == pytest.approx(TWO_POW_M04, rel=1e-14)

    @pytest.mark.parametrize("args", [(-1.0, 1.0, 0.3), (1.0, 1.0, 0.0), (1.0, 1.0, 1.0)])
    def test_cov_domain(self, args):
        with pytest.raises(DomainError):
            fbm_cov(*args)

    def test_autocov_examples(self):
        assert fgn_autocov(0, 0.37) == 1.0
        assert np.all(fgn_autocov(np.arange(1, 50), 0.5) == 0.0)
        assert fgn_autocov(1, 0.3) == pytest.approx(TWO_POW_M04 - 1.0, rel=1e-14)

    @pytest.mark.parametrize("h", [0.05, 0.1, 0.3, 0.45, 0.7, 0.95])
    def test_autocov_against_high_precision(self, h):
        lags = np.array([0, 1, 2, 3, 7, 8, 9, 50, 1000, 10_000, 250_000])
        got = fgn_autocov(lags, h)
        want = np.array([_mp_gamma(k, h) for k in lags])
        np.testing.assert_allclose(got, want, rtol=1e-13)

    def test_autocov_domain(self):
        with pytest.raises(DomainError):
            fgn_autocov(-1, 0.3)
        with pytest.raises(DomainError):
            fgn_autocov(1.5, 0.3)
        with pytest.raises(DomainError):
            fgn_autocov(1, 1.2)

    @pytest.mark.parametrize("h", [0.1, 0.3, 0.5, 0.8])
    def test_increment_sums_reproduce_fbm_cov(self, h):
        gamma = fgn_autocov(np.arange(33), h)
        toe = gamma[np.abs(np.subtract.outer(np.arange(32), np.arange(32)))]
        partial = np.cumsum(np.cumsum(toe, axis=0), axis=1)
        for i in range(1, 33):
            for j in range(1, 33):
                assert partial[i - 1, j - 1] == pytest.approx(fbm_cov(i, j, h), rel=1e-11, abs=1e-11)

    @pytest.mark.parametrize("h", [0.1, 0.2, 0.3, 0.4])
    def test_negative_correlation_and_decay(self, h):
        k = np.arange(1, 10_001)
        gamma = fgn_autocov(k, h)
        assert np.all(gamma < 0)
        tail = k >= 2
        assert np.all(np.abs(gamma[tail]) <= 2.0 * k[tail] ** (2 * h - 2))

    @given(s=st.floats(0, 50), t=st.floats(0, 50), h=st.floats(0.01, 0.99))
    def test_cov_symmetric_and_cauchy_schwarz(self, s, t, h):
        c = fbm_cov(s, t, h)
        assert c == pytest.approx(fbm_cov(t, s, h), rel=1e-12, abs=1e-12)
        assert c * c <= fbm_cov(s, s, h) * fbm_cov(t, t, h) * (1 + 1e-9) + 1e-12


class TestSampleFgn:
    @pytest.mark.parametrize("method", list(FgnMethod))
    def test_deterministic(self, method):
        a = sample_fgn(300, 0.3, 99, method)
        b = sample_fgn(300, 0.3, 99, method)
        assert a.method is method
        assert np.array_equal(a.increments, b.increments)
        assert not np.array_equal(a.increments, sample_fgn(300, 0.3, 100, method).increments)

    def test_cholesky_and_hosking_share_factorization(self):
        a = sample_fgn(600, 0.25, 5, "cholesky").increments
        b = sample_fgn(600, 0.25, 5, "hosking").increments
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_tiny_lengths(self, n):
        for method in FgnMethod:
            x = sample_fgn(n, 0.3, 1, method)
            assert len(x) == n and np.all(np.isfinite(x.increments))

    def test_rejects_bad_input(self):
        with pytest.raises(DomainError):
            sample_fgn(0, 0.3, 1)
        with pytest.raises(DomainError):
            sample_fgn(10, 0.3, -1)
        with pytest.raises(ValueError):
            sample_fgn(10, 0.3, 1, "wavelet")

    def test_fallback_is_recorded(self, monkeypatch):
        monkeypatch.setattr(fbm_mod, "_circulant_sqrt_eigenvalues", lambda n, h: None)
        x = sample_fgn(64, 0.3, 1)
        assert x.method is FgnMethod.CHOLESKY
        assert np.array_equal(x.increments, sample_fgn(64, 0.3, 1, "cholesky").increments)
        with pytest.raises(MethodError):
            sample_fgn(64, 0.3, 1, fallback=False)

    def test_cholesky_cap(self):
        with pytest.raises(MethodError):
            sample_fgn(100, 0.3, 1, "cholesky", cholesky_max_n=50)

    def test_embedding_spectrum_nonnegative(self):
        for h in (0.05, 0.3, 0.5, 0.75, 0.95):
            for n in (1, 7, 1000, 4097):
                assert fbm_mod._circulant_sqrt_eigenvalues(n, h) is not None

    def test_lag_autocovariance(self):
        n, seeds, h = 4096, 120, 0.3
        est = np.empty((seeds, 2))
        for s in range(seeds):
            x = sample_fgn(n, h, s).increments
            est[s] = [x @ x / n, x[:-1] @ x[1:] / (n - 1)]
        mean = est.mean(axis=0)
        se = est.std(axis=0, ddof=1) / math.sqrt(seeds)
        target = fgn_autocov(np.array([0, 1]), h)
        assert np.all(np.abs(mean - target) < 4 * se)
        assert target[1] == pytest.approx(-0.242141716744801, abs=1e-12)

    def test_scaled_quadratic_sum_tends_to_one(self):
        n, h = 2**14, 0.3
        vals = [np.sum(sample_fgn(n, h, s).increments ** 2) / n for s in range(200)]
        assert np.mean(vals) == pytest.approx(1.0, rel=0.05)


class TestSampleFbm:
    def test_starts_at_zero_and_matches_scaled_cumsum(self):
        path = sample_fbm(500, 2.5, 0.3, 8)
        fgn = sample_fgn(500, 0.3, 8)
        assert path.values[0] == 0.0
        np.testing.assert_allclose(path.values[1:], (2.5 / 500) ** 0.3 * np.cumsum(fgn.increments), rtol=1e-14)
        assert path.times[-1] == 2.5 and path.times.size == 501

    @pytest.mark.parametrize("n,horizon,h", [(64, 1.0, 0.3), (100, 3.0, 0.2), (50, 0.5, 0.7)])
    def test_terminal_variance(self, n, horizon, h):
        seeds = 1500
        end = np.array([sample_fbm(n, horizon, h, s).values[-1] for s in range(seeds)])
        var = end.var(ddof=1)
        target = horizon ** (2 * h)
        se = target * math.sqrt(2.0 / (seeds - 1))
        assert abs(var - target) < 4 * se

    def test_brownian_midpoint_covariance(self):
        seeds = 2000
        pairs = np.array([sample_fbm(1000, 1.0, 0.5, s).values[[500, 1000]] for s in range(seeds)])
        cov = np.mean(pairs[:, 0] * pairs[:, 1])
        # Var of the product of jointly Gaussian zero-mean variables: s_xx s_yy + s_xy^2
        se = math.sqrt((0.5 * 1.0 + 0.25) / seeds)
        assert abs(cov - fbm_cov(0.5, 1.0, 0.5)) < 4 * se

    def test_brownian_covariance_matrix(self):
        seeds = 3000
        paths = np.array([sample_fbm(8, 1.0, 0.5, s).values[1:] for s in range(seeds)])
        emp = paths.T @ paths / seeds
        t = np.arange(1, 9) / 8
        target = np.minimum.outer(t, t)
        se = np.sqrt((np.outer(t, t) + target**2) / seeds)
        assert np.all(np.abs(emp - target) < 4 * se)

    def test_rejects_bad_horizon(self):
        with pytest.raises(DomainError):
            sample_fbm(10, 0.0, 0.3, 1)

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(1, 300), h=st.floats(0.02, 0.98), seed=st.integers(0, 2**64 - 1))
    def test_paths_finite(self, n, h, seed):
        path = sample_fbm(n, 1.0, h, seed)
        assert path.values[0] == 0.0 and np.all(np.isfinite(path.values))
