"""Quantile-fixed GAL distribution and Bayesian ordinal quantile regression."""

from .gal import GalParams, QuantileGalParams, gamma_bounds, mixture_constants
from .mcmc import ModelConfig, TuningConfig, run_bqror, run_chain
from .model import CutpointSpec, OrdinalDataset, PriorConfig

__version__ = "0.1.0"

__all__ = [
    "GalParams",
    "QuantileGalParams",
    "gamma_bounds",
    "mixture_constants",
    "ModelConfig",
    "TuningConfig",
    "run_chain",
    "run_bqror",
    "CutpointSpec",
    "OrdinalDataset",
    "PriorConfig",
    "__version__",
]
