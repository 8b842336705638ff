"""Simulation and parameter estimation for rough Bessel processes driven by fBm."""

__version__ = "0.1.0"

from .bessel import (
    BesselPath,
    ModelParams,
    boundedness_diagnostic,
    euler_step,
    simulate_epsilon_ladder,
    simulate_prelimit,
)
from .estimation import (
    EstimationResult,
    ObservedPath,
    estimate_drift,
    estimate_hurst,
    estimate_sigma,
    estimate_sigma_plugin,
    v12,
    v22,
)
from .estimators import DriftEstimator, PowerVariationEstimator
from .fbm import FbmPath, FgnSample, fbm_cov, fgn_autocov, sample_fbm, sample_fgn

__all__ = [
    "BesselPath",
    "DriftEstimator",
    "EstimationResult",
    "FbmPath",
    "FgnSample",
    "ModelParams",
    "ObservedPath",
    "PowerVariationEstimator",
    "boundedness_diagnostic",
    "estimate_drift",
    "estimate_hurst",
    "estimate_sigma",
    "estimate_sigma_plugin",
    "euler_step",
    "fbm_cov",
    "fgn_autocov",
    "sample_fbm",
    "sample_fgn",
    "simulate_epsilon_ladder",
    "simulate_prelimit",
    "v12",
    "v22",
]
