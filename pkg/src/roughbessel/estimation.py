"""Power-variation and drift estimators for discretely observed paths.

All estimators take an :class:`ObservedPath` (values on ``t_k = k T / n``)
and return an :class:`EstimationResult` carrying the raw estimate, a
validity flag, and the intermediate quantities used to compute it.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import DomainError, check_hurst, check_path_array, check_positive

__all__ = [
    "DEFAULT_FLOOR",
    "DegeneratePathError",
    "EstimationResult",
    "ObservedPath",
    "estimate_drift",
    "estimate_hurst",
    "estimate_sigma",
    "estimate_sigma_plugin",
    "hurst_from_ratio",
    "v12",
    "v22",
]

DEFAULT_FLOOR = 0.001

_TWO_LOG2 = 2.0 * math.log(2.0)


class DegeneratePathError(ValueError):
    """The path has no first-order variation (all observations equal)."""


@dataclass(frozen=True)
class ObservedPath:
    values: np.ndarray
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "values", check_path_array(self.values))
        object.__setattr__(self, "horizon", check_positive(self.horizon, "horizon"))

    @property
    def n(self) -> int:
        return self.values.size - 1

    @classmethod
    def of(cls, path, horizon=None) -> "ObservedPath":
        """Coerce a BesselPath, FbmPath, ObservedPath or array (with ``horizon``)."""
        if isinstance(path, cls):
            return path
        if hasattr(path, "x") and hasattr(path, "driver"):
            return cls(path.x, path.horizon)
        if hasattr(path, "values") and hasattr(path, "horizon"):
            return cls(path.values, path.horizon)
        if horizon is None:
            raise DomainError("horizon is required when passing a bare array")
        return cls(path, horizon)


@dataclass
class EstimationResult:
    estimate: float
    valid: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "estimate": _json_float(self.estimate),
            "valid": bool(self.valid),
            "diagnostics": {k: _json_float(v) for k, v in self.diagnostics.items()},
        }


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def v12(path) -> float:
    """Sum of squared first differences."""
    values = ObservedPath.of(path).values
    d = np.diff(values)
    return float(d @ d)


def v22(path) -> float:
    """Sum of squared second differences; needs ``n >= 2``."""
    values = ObservedPath.of(path).values
    if values.size < 3:
        raise DomainError("second-order variation needs n >= 2")
    d = values[2:] - 2.0 * values[1:-1] + values[:-2]
    return float(d @ d)


def hurst_from_ratio(ratio: float) -> float:
    """Invert ``V22 / V12 -> 4 - 2^(2H)``; NaN when ``4 - ratio <= 0``."""
    arg = 4.0 - ratio
    return math.log(arg) / _TWO_LOG2 if arg > 0.0 else math.nan


def _sigma_formula(n, horizon, first, h):
    return math.sqrt(n ** (2.0 * h - 1.0) * first) / horizon**h


def estimate_hurst(path) -> EstimationResult:
    """Hurst index from the ratio of second- to first-order quadratic variation.

    ``H_hat = log(4 - V22 / V12) / (2 log 2)``. The result is flagged invalid
    unless the log argument lies in (1, 2), i.e. ``H_hat`` in (0, 1/2). The raw
    value is still reported when the argument is positive, and NaN otherwise.

    Raises:
        DegeneratePathError: if ``V12 == 0``.
    """
    obs = ObservedPath.of(path)
    first = v12(obs)
    second = v22(obs)
    if first == 0.0:
        raise DegeneratePathError("V12 = 0: the path is constant on the grid")
    ratio = second / first
    arg = 4.0 - ratio
    estimate = hurst_from_ratio(ratio)
    return EstimationResult(
        estimate=estimate,
        valid=1.0 < arg < 2.0,
        diagnostics={"v12": first, "v22": second, "ratio": ratio, "log_argument": arg},
    )


def estimate_sigma(path, h: float) -> EstimationResult:
    """Volatility for a known Hurst index: ``T^-H sqrt(n^(2H-1) V12)``."""
    h = check_hurst(h, "h")
    obs = ObservedPath.of(path)
    first = v12(obs)
    estimate = _sigma_formula(obs.n, obs.horizon, first, h)
    return EstimationResult(estimate=estimate, valid=first > 0.0, diagnostics={"v12": first, "hurst": h})


def estimate_sigma_plugin(path) -> EstimationResult:
    """Volatility with the Hurst index replaced by :func:`estimate_hurst`.

    The volatility formula is evaluated at whatever finite value the first
    stage returns, so the estimate is reported even when that value is out of
    range; ``valid`` requires both stages to be valid.
    """
    obs = ObservedPath.of(path)
    h_res = estimate_hurst(obs)
    h_hat = h_res.estimate
    first = h_res.diagnostics["v12"]
    estimate = _sigma_formula(obs.n, obs.horizon, first, h_hat) if math.isfinite(h_hat) else math.nan
    return EstimationResult(
        estimate=estimate,
        valid=h_res.valid and first > 0.0,
        diagnostics={"hurst_estimate": h_hat, **h_res.diagnostics},
    )


def estimate_drift(path, floor: float = DEFAULT_FLOOR) -> EstimationResult:
    """Drift estimate ``X(T) / int_0^T dt / X(t)``.

    The integral is the left Riemann sum ``(T/n) sum_{i<n} 1 / max(x_i, floor)``,
    i.e. one term per grid node at resolution ``n / T`` nodes per unit time.
    """
    floor = check_positive(floor, "floor")
    obs = ObservedPath.of(path)
    x = obs.values
    integral = float(np.sum(1.0 / np.maximum(x[:-1], floor))) * (obs.horizon / obs.n)
    return EstimationResult(
        estimate=x[-1] / integral,
        valid=integral > 0.0,
        diagnostics={"integral_sum": integral, "terminal_value": float(x[-1]), "floor": floor},
    )
