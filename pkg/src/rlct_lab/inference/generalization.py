"""Bayesian predictive density and the generalization error G_n."""

from __future__ import annotations

import logging

import numpy as np
from scipy.special import gammaln, logsumexp

from ..errors import DomainError, NumericalError
from ..mixture.poisson import Lattice, mixture_log_pmf_many, truth_lattice
from ..models import TrueModel, as_count
from .sampler import PosteriorSamples

logger = logging.getLogger(__name__)

DRAW_CHUNK = 256


def predictive_log_density_many(samples: PosteriorSamples, points: np.ndarray) -> np.ndarray:
    """log E_w[p(x|w)] for every row of ``points``, averaging over draws in log space."""

    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != samples.M:
        raise DomainError(f"points must have shape (P, {samples.M})")

    log_factorial = gammaln(points + 1.0).sum(axis=1)
    total = np.full(points.shape[0], -np.inf)
    for start in range(0, samples.size, DRAW_CHUNK):
        weights = samples.weights[start : start + DRAW_CHUNK]
        rates = samples.rates[start : start + DRAW_CHUNK]
        # (P, S, H) component log pmfs for this chunk of draws.
        log_terms = (
            np.einsum("pm,shm->psh", points, np.log(rates))
            - rates.sum(axis=2)[None, :, :]
            - log_factorial[:, None, None]
        )
        with np.errstate(divide="ignore"):
            log_terms = log_terms + np.log(weights)[None, :, :]
        per_draw = logsumexp(log_terms, axis=2)
        total = np.logaddexp(total, logsumexp(per_draw, axis=1))
    return total - np.log(samples.size)


def predictive_density(samples: PosteriorSamples, x: np.ndarray | list[int] | int) -> float:
    """E_w[p(x|w)] over the posterior draws."""

    count = as_count(x, M=samples.M)
    return float(np.exp(predictive_log_density_many(samples, count[None, :])[0]))


def estimate_generalization(
    samples: PosteriorSamples,
    truth: TrueModel,
    tol: float,
    lattice: Lattice | None = None,
) -> float:
    """G_n = -∑_x q(x) log E_w[p(x|w)] over the truth's truncated lattice."""

    if samples.M != truth.M:
        raise DomainError(f"samples have M={samples.M} but truth has M={truth.M}")
    if lattice is None:
        lattice = truth_lattice(truth, tol)
    log_q = mixture_log_pmf_many(lattice.points, truth.params)
    log_pred = predictive_log_density_many(samples, lattice.points)
    q = np.exp(log_q)

    vanished = ~np.isfinite(log_pred)
    if np.any(vanished & (q > tol)):
        worst = lattice.points[np.argmax(np.where(vanished, q, 0.0))]
        raise NumericalError(f"predictive density vanished at x={worst.tolist()} where q(x) > {tol}")
    if np.any(vanished):
        logger.warning("predictive density vanished at %d low-mass lattice points", int(vanished.sum()))
    return float(-np.sum(q[~vanished] * log_pred[~vanished]))
