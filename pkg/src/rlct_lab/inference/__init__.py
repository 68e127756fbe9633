"""Posterior sampling, generalization error, λ fitting and WBIC."""

from .fitting import LambdaFit, SampleSizeSummary, fit_lambda
from .generalization import estimate_generalization, predictive_density, predictive_log_density_many
from .sampler import PosteriorSampler, PosteriorSamples, effective_sample_size, posterior_mcmc
from .wbic import WbicEstimate, WbicReference, WbicSummary, summarize_wbic, wbic_lambda

__all__ = [
    "LambdaFit",
    "PosteriorSampler",
    "PosteriorSamples",
    "SampleSizeSummary",
    "WbicEstimate",
    "WbicReference",
    "WbicSummary",
    "effective_sample_size",
    "estimate_generalization",
    "fit_lambda",
    "posterior_mcmc",
    "predictive_density",
    "predictive_log_density_many",
    "summarize_wbic",
    "wbic_lambda",
]
