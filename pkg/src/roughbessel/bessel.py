"""Euler simulation of the epsilon-regularized rough Bessel equation.

The simulated process solves

    X(t) = x0 + a * L(t) + sigma * B(t),   L(t) = int_0^t ds / (X(s) 1{X(s) > 0} + eps),

with B a standard fBm. Both X and L are advanced with the same left-point
rule, so ``x[k] == x0 + a * l[k] + sigma * b[k]`` holds up to round-off.
"""

import logging
import math
from dataclasses import dataclass

import numba
import numpy as np

from ._validation import DomainError, check_finite, check_hurst, check_positive
from .fbm import FbmPath

__all__ = [
    "BesselPath",
    "ModelParams",
    "boundedness_bound",
    "boundedness_diagnostic",
    "euler_step",
    "holder_constant",
    "ladder_violations",
    "simulate_epsilon_ladder",
    "simulate_prelimit",
]

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-4


@dataclass(frozen=True)
class ModelParams:
    """Parameters ``(x0, a, sigma, H, eps)`` of the regularized equation."""

    x0: float = 1.0
    a: float = 2.0
    sigma: float = 1.0
    hurst: float = 0.3
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        for name in ("x0", "a", "sigma", "epsilon"):
            object.__setattr__(self, name, check_positive(getattr(self, name), name))
        object.__setattr__(self, "hurst", check_hurst(self.hurst))

    def with_epsilon(self, epsilon: float) -> "ModelParams":
        return ModelParams(self.x0, self.a, self.sigma, self.hurst, epsilon)


@dataclass(frozen=True)
class BesselPath:
    """Grid values of the regularized process and its accumulated L-functional."""

    times: np.ndarray
    x: np.ndarray
    l: np.ndarray
    params: ModelParams
    driver: FbmPath

    @property
    def b(self) -> np.ndarray:
        return self.driver.values

    @property
    def horizon(self) -> float:
        return self.driver.horizon

    @property
    def n(self) -> int:
        return self.x.size - 1

    def decomposition_residual(self) -> float:
        """Max relative gap between ``x`` and ``x0 + a l + sigma b`` over the grid."""
        p = self.params
        rebuilt = p.x0 + p.a * self.l + p.sigma * self.b
        scale = p.x0 + p.a * np.abs(self.l) + p.sigma * np.abs(self.b)
        return float(np.max(np.abs(self.x - rebuilt) / scale))


def euler_step(x: float, dB: float, params: ModelParams, dt: float):
    """One left-point Euler step; returns ``(x_next, dL)``."""
    check_finite(x, "x")
    check_finite(dB, "dB")
    check_positive(dt, "dt")
    dL = dt / ((x if x > 0.0 else 0.0) + params.epsilon)
    return x + params.a * dL + params.sigma * dB, dL


@numba.njit(cache=True)
def _euler_kernel(x0, a, sigma, eps, dt, b, x, l):
    x[0] = x0
    l[0] = 0.0
    xk = x0
    lk = 0.0
    for k in range(b.size - 1):
        pos = xk if xk > 0.0 else 0.0
        dl = dt / (pos + eps)
        xk = xk + a * dl + sigma * (b[k + 1] - b[k])
        lk = lk + dl
        x[k + 1] = xk
        l[k + 1] = lk


def simulate_prelimit(params: ModelParams, driver: FbmPath) -> BesselPath:
    """Run the Euler scheme along the grid of ``driver`` (``dt = T / n``)."""
    n = driver.values.size - 1
    if n < 1:
        raise DomainError("driver must have at least one step")
    x = np.empty(n + 1)
    l = np.empty(n + 1)
    _euler_kernel(params.x0, params.a, params.sigma, params.epsilon, driver.horizon / n, driver.values, x, l)
    if not np.all(np.isfinite(x)):
        raise DomainError("Euler iterates became non-finite")
    x.flags.writeable = False
    l.flags.writeable = False
    return BesselPath(times=driver.times, x=x, l=l, params=params, driver=driver)


def ladder_violations(paths, rtol: float = 0.0):
    """Count grid nodes where a smaller-epsilon path lies below a larger-epsilon one.

    ``paths`` must be ordered by decreasing epsilon. A node counts as a
    violation when ``x_fine < x_coarse - rtol * (1 + |x_coarse|)``.
    Returns ``(count, worst_gap)``.
    """
    count = 0
    worst = 0.0
    for coarse, fine in zip(paths, paths[1:]):
        gap = coarse.x - fine.x
        bad = gap > rtol * (1.0 + np.abs(coarse.x))
        count += int(np.count_nonzero(bad))
        if bad.any():
            worst = max(worst, float(gap.max()))
    return count, worst


def simulate_epsilon_ladder(params_base: ModelParams, epsilons, driver: FbmPath):
    """Simulate one path per epsilon, all driven by the same noise.

    In continuous time the solutions are ordered: smaller epsilon gives a
    pointwise larger path. The discrete ordering is checked and any violation
    is logged at WARNING level.
    """
    eps = [check_positive(e, "epsilon") for e in epsilons]
    if not eps:
        raise DomainError("epsilon ladder must not be empty")
    if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
        raise DomainError("epsilons must be strictly decreasing")
    paths = [simulate_prelimit(params_base.with_epsilon(e), driver) for e in eps]
    count, worst = ladder_violations(paths)
    if count:
        logger.warning(
            "epsilon ordering violated at %d node(s), worst gap %.3g (seed=%d)", count, worst, driver.seed
        )
    return paths


def holder_constant(times, values, lam: float, max_points: int = 1000) -> float:
    """Empirical Hoelder constant ``max |dB| / |dt|^lam`` over pairs of a coarsened grid.

    The grid is thinned to every ``ceil(n / max_points)``-th node (the last
    node is always kept), and all pairs of retained nodes are compared.
    """
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    n = values.size - 1
    stride = max(1, math.ceil(n / max_points))
    idx = np.arange(0, n + 1, stride)
    if idx[-1] != n:
        idx = np.append(idx, n)
    t = times[idx]
    v = values[idx]
    best = 0.0
    for i in range(t.size - 1):
        ratio = np.abs(v[i + 1 :] - v[i]) / (t[i + 1 :] - t[i]) ** lam
        best = max(best, float(ratio.max()))
    return best


def boundedness_bound(params: ModelParams, horizon: float, lam: float, holder_const: float) -> float:
    """``x0 + a T max(2/x0, 1) + sigma T^lam C`` with C a Hoelder constant of the driver."""
    return (
        params.x0
        + params.a * horizon * max(2.0 / params.x0, 1.0)
        + params.sigma * horizon**lam * holder_const
    )


def boundedness_diagnostic(path: BesselPath, lam: float | None = None, holder_const: float | None = None) -> bool:
    """Check ``max_k |x[k]|`` against the a.s. finiteness bound of the pre-limit process.

    ``lam`` defaults to ``H / 2``; ``holder_const`` defaults to the empirical
    Hoelder constant of the driver at exponent ``lam``.
    """
    hurst = path.params.hurst
    if lam is None:
        lam = hurst / 2.0
    if not 0.0 < lam < hurst:
        raise DomainError(f"lam must lie in (0, H={hurst}), got {lam!r}")
    if holder_const is None:
        holder_const = holder_constant(path.times, path.b, lam)
    bound = boundedness_bound(path.params, path.horizon, lam, holder_const)
    return bool(np.max(np.abs(path.x)) < bound)
