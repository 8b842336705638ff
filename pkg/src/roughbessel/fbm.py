"""Exact-covariance sampling of fractional Gaussian noise and fractional Brownian motion.

Three samplers are provided for unit-spacing fGn:

* ``"circulant"`` -- circulant embedding (Davies-Harte), O(n log n);
* ``"cholesky"`` -- Cholesky factor of the Toeplitz covariance, O(n^3) setup;
* ``"hosking"`` -- Durbin-Levinson recursion, O(n^2), no matrix storage.

fBm paths on ``[0, T]`` are obtained by cumulating fGn and rescaling with
``(T/n)**H`` (self-similarity).
"""

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
import scipy.linalg

from ._validation import DomainError, check_count, check_hurst, check_positive, check_seed
from .seeding import make_rng

__all__ = [
    "CHOLESKY_MAX_N",
    "FbmPath",
    "FgnMethod",
    "FgnSample",
    "MethodError",
    "fbm_cov",
    "fgn_autocov",
    "sample_fbm",
    "sample_fgn",
]

# Dense Cholesky beyond this size costs gigabytes; callers must opt in explicitly.
CHOLESKY_MAX_N = 8192

# Relative tolerance below which negative embedding eigenvalues are treated as round-off.
EIGEN_CLAMP_RTOL = 1e-9

# Lag from which fgn_autocov switches to its cancellation-free series form.
_SERIES_MIN_LAG = 8
_SERIES_TERMS = 14


class MethodError(RuntimeError):
    """The requested sampling method cannot produce an exact sample."""


class FgnMethod(str, enum.Enum):
    CIRCULANT = "circulant"
    CHOLESKY = "cholesky"
    HOSKING = "hosking"


@dataclass(frozen=True)
class FgnSample:
    """Unit-spacing fractional Gaussian noise ``B(k+1) - B(k)``, k = 0..n-1."""

    increments: np.ndarray
    hurst: float
    seed: int
    method: FgnMethod

    def __len__(self):
        return self.increments.size


@dataclass(frozen=True)
class FbmPath:
    """fBm sampled on the uniform grid ``t_k = k T / n``, k = 0..n."""

    times: np.ndarray
    values: np.ndarray
    horizon: float
    hurst: float
    seed: int
    method: FgnMethod

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def fbm_cov(s: float, t: float, h: float) -> float:
    """Covariance ``E[B(s) B(t)] = (t^2H + s^2H - |t - s|^2H) / 2`` of standard fBm."""
    h = check_hurst(h, "h")
    if s < 0 or t < 0:
        raise DomainError(f"times must be non-negative, got s={s!r}, t={t!r}")
    two_h = 2.0 * h
    return 0.5 * (t**two_h + s**two_h - abs(t - s) ** two_h)


def _even_binomial_series(two_h: float) -> np.ndarray:
    # 2 * C(2H, j) for even j = 2, 4, ...; the odd terms cancel in (1+u)^2H + (1-u)^2H.
    coeffs = []
    c = 1.0
    for j in range(1, 2 * _SERIES_TERMS + 1):
        c *= (two_h - j + 1) / j
        if j % 2 == 0:
            coeffs.append(2.0 * c)
    return np.array(coeffs)


def fgn_autocov(k, h):
    """Autocovariance of unit-spacing fGn at integer lag(s) ``k``.

    ``gamma(k) = ((k+1)^2H - 2 k^2H + |k-1|^2H) / 2``. For large lags the three
    powers nearly cancel, so ``k >= 8`` is evaluated as
    ``k^2H / 2 * sum_j 2 C(2H, 2j) k^(-2j)``, which keeps full relative accuracy.

    Accepts a scalar or an array of non-negative integers; returns the same shape.
    """
    h = check_hurst(h, "h")
    lags = np.asarray(k)
    if lags.size and (np.any(lags < 0) or np.any(lags != np.floor(lags))):
        raise DomainError("lags must be non-negative integers")
    lags = lags.astype(np.float64)
    two_h = 2.0 * h

    out = np.empty_like(lags)
    small = lags < _SERIES_MIN_LAG
    ks = lags[small]
    out[small] = 0.5 * ((ks + 1.0) ** two_h - 2.0 * ks**two_h + np.abs(ks - 1.0) ** two_h)

    big = ~small
    if np.any(big):
        kb = lags[big]
        u2 = 1.0 / (kb * kb)
        coeffs = _even_binomial_series(two_h)
        acc = np.zeros_like(kb)
        for c in coeffs[::-1]:
            acc = (acc + c) * u2
        out[big] = 0.5 * kb**two_h * acc

    if np.ndim(k) == 0:
        return float(out)
    return out


@lru_cache(maxsize=8)
def _circulant_sqrt_eigenvalues(n: int, h: float):
    """``sqrt(lambda / 2n)`` for the minimal circulant embedding, or None if not PSD."""
    gamma = fgn_autocov(np.arange(n + 1), h)
    first_row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = scipy.fft.rfft(first_row).real
    eig = np.concatenate([eig, eig[-2:0:-1]])
    floor = -EIGEN_CLAMP_RTOL * eig.max()
    if eig.min() < floor:
        return None
    np.clip(eig, 0.0, None, out=eig)
    out = np.sqrt(eig / eig.size)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=2)
def _cholesky_factor(n: int, h: float) -> np.ndarray:
    cov = scipy.linalg.toeplitz(fgn_autocov(np.arange(n), h))
    factor = scipy.linalg.cholesky(cov, lower=True)
    factor.flags.writeable = False
    return factor


def _sample_circulant(n, h, rng):
    scale = _circulant_sqrt_eigenvalues(n, h)
    if scale is None:
        return None
    m = scale.size
    z = rng.standard_normal(2 * m)
    w = scale * (z[:m] + 1j * z[m:])
    return scipy.fft.fft(w, overwrite_x=True).real[:n].copy()


def _sample_cholesky(n, h, rng, max_n):
    if n > max_n:
        raise MethodError(f"Cholesky sampling capped at n <= {max_n}, got n={n}")
    z = rng.standard_normal(n)
    return _cholesky_factor(n, h) @ z


def _sample_hosking(n, h, rng):
    z = rng.standard_normal(n)
    gamma = fgn_autocov(np.arange(n), h)
    x = np.empty(n)
    x[0] = z[0]
    phi = np.empty(0)
    v = gamma[0]
    for k in range(1, n):
        kappa = (gamma[k] - phi @ gamma[k - 1 : 0 : -1]) / v if k > 1 else gamma[1] / v
        phi = np.append(phi - kappa * phi[::-1], kappa)
        v *= 1.0 - kappa * kappa
        # phi[j] multiplies x[k-1-j]
        x[k] = phi @ x[k - 1 :: -1] + math.sqrt(v) * z[k]
    return x


def sample_fgn(
    n: int,
    hurst: float,
    seed: int,
    method="circulant",
    *,
    fallback: bool = True,
    cholesky_max_n: int = CHOLESKY_MAX_N,
) -> FgnSample:
    """Draw ``n`` values of unit-spacing fractional Gaussian noise.

    The output is a deterministic function of ``(n, hurst, seed, method)``.
    When the circulant embedding is not non-negative definite (beyond a
    relative round-off tolerance) the sampler falls back to Cholesky if
    ``fallback`` is set; the method actually used is recorded on the result.
    """
    n = check_count(n, "n")
    hurst = check_hurst(hurst)
    seed = check_seed(seed)
    method = FgnMethod(method)
    rng = make_rng(seed)

    if method is FgnMethod.CIRCULANT:
        values = _sample_circulant(n, hurst, rng)
        if values is None:
            if not fallback:
                raise MethodError(f"circulant embedding is not PSD for n={n}, H={hurst}")
            method = FgnMethod.CHOLESKY
            values = _sample_cholesky(n, hurst, make_rng(seed), cholesky_max_n)
    elif method is FgnMethod.CHOLESKY:
        values = _sample_cholesky(n, hurst, rng, cholesky_max_n)
    else:
        values = _sample_hosking(n, hurst, rng)

    values.flags.writeable = False
    return FgnSample(increments=values, hurst=hurst, seed=seed, method=method)


def grid(n: int, horizon: float) -> np.ndarray:
    """Uniform grid ``t_k = T * (k / n)``; the last node equals ``T`` exactly."""
    return horizon * (np.arange(n + 1) / n)


def sample_fbm(n: int, horizon: float, hurst: float, seed: int, method="circulant", **kwargs) -> FbmPath:
    """Sample standard fBm at ``n + 1`` equally spaced times on ``[0, horizon]``."""
    horizon = check_positive(horizon, "horizon")
    fgn = sample_fgn(n, hurst, seed, method, **kwargs)
    values = np.empty(fgn.increments.size + 1)
    values[0] = 0.0
    np.cumsum(fgn.increments, out=values[1:])
    values[1:] *= (horizon / n) ** fgn.hurst
    values.flags.writeable = False
    times = grid(n, horizon)
    times.flags.writeable = False
    return FbmPath(
        times=times, values=values, horizon=horizon, hurst=fgn.hurst, seed=fgn.seed, method=fgn.method
    )
