"""Input validation helpers shared across the package."""

import math
from numbers import Integral, Real

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


def check_hurst(h, name="hurst"):
    if not isinstance(h, Real) or not math.isfinite(h) or not 0.0 < h < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {h!r}")
    return float(h)


def check_positive(value, name):
    if not isinstance(value, Real) or not math.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a finite positive number, got {value!r}")
    return float(value)


def check_finite(value, name):
    if not isinstance(value, Real) or not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return float(value)


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, Integral) or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, Integral) or not 0 <= seed < 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def check_path_array(values, name="values", min_length=2):
    """Return ``values`` as a finite 1-D float64 array of at least ``min_length``."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise DomainError(f"{name} needs at least {min_length} points, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr
