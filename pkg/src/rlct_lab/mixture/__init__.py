"""Poisson mixture densities and divergences."""

from .poisson import (
    Lattice,
    kl_mean_error,
    log_loss,
    mixture_log_pmf,
    mixture_pmf,
    poisson_pmf,
    random_true_model,
    realizing_parameter,
    sample,
    sq_surrogate,
    truncation_lattice,
    truth_lattice,
)

__all__ = [
    "Lattice",
    "kl_mean_error",
    "log_loss",
    "mixture_log_pmf",
    "mixture_pmf",
    "poisson_pmf",
    "random_true_model",
    "realizing_parameter",
    "sample",
    "sq_surrogate",
    "truncation_lattice",
    "truth_lattice",
]
