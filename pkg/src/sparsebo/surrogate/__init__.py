"""Gaussian-process surrogates: MAP (GPEI baseline) and SAAS ensembles."""

from sparsebo.surrogate.gp import (
    FitError,
    KernelParams,
    MapConfig,
    PosteriorEnsemble,
    fit_map,
    matern52,
    matern52_grad,
    posterior,
)
from sparsebo.surrogate.saas import McmcConfig, fit_saas, log_half_cauchy, saas_log_density

__all__ = [
    "FitError", "KernelParams", "MapConfig", "McmcConfig", "PosteriorEnsemble",
    "fit_map", "fit_saas", "log_half_cauchy", "matern52", "matern52_grad",
    "posterior", "saas_log_density",
]
