"""Poisson and Poisson-mixture densities, sampling, log loss and the divergences K(w).

All pmf arithmetic happens in log space; sums over x run over a truncated lattice box
[0, x_max]^M chosen so that the discarded mass is below a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy
from scipy.stats import poisson

from ..errors import DomainError
from ..models import MixtureParams, TrueModel, as_count, as_rate_vector
from ..utils.seeding import DATA_STREAM, make_rng

MAX_TOL = 1e-6


def poisson_pmf(x: int, b: float) -> float:
    """Po(x | b) = e^{-b} b^x / x!, evaluated in log space."""

    if not b > 0.0:
        raise DomainError(f"Poisson rate must be > 0, got {b!r}")
    count = int(as_count(x)[0])
    return float(np.exp(xlogy(count, b) - b - gammaln(count + 1)))


def component_log_pmf(points: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """log Po(x | b_k) for every point (rows of ``points``) and component (rows of ``rates``).

    Returns an array of shape (P, H).
    """

    points = np.asarray(points, dtype=float)
    log_factorial = gammaln(points + 1.0).sum(axis=1)
    return points @ np.log(rates).T - rates.sum(axis=1)[None, :] - log_factorial[:, None]


def mixture_log_pmf_many(points: np.ndarray, w: MixtureParams) -> np.ndarray:
    """log p(x | w) for every row of ``points`` via log-sum-exp over components."""

    if not np.any(w.weights > 0.0):
        raise DomainError("at least one mixture weight must be positive")
    with np.errstate(divide="ignore"):
        log_weights = np.log(w.weights)
    return logsumexp(component_log_pmf(points, w.rates) + log_weights[None, :], axis=1)


def mixture_log_pmf(x: np.ndarray | list[int] | int, w: MixtureParams) -> float:
    """log ∑_k a_k ∏_m Po(x_m | b_km) for a single observation."""

    count = as_count(x, M=w.M)
    return float(mixture_log_pmf_many(count[None, :], w)[0])


def mixture_pmf(x: np.ndarray | list[int] | int, w: MixtureParams) -> float:
    return float(np.exp(mixture_log_pmf(x, w)))


def sample(w: MixtureParams, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` i.i.d. observations; returns an integer array of shape (count, M).

    Each draw picks component k with probability a_k, then inverts the Poisson CDF of
    every coordinate at a uniform variate.
    """

    if count < 1:
        raise DomainError(f"sample size must be >= 1, got {count}")
    rng = make_rng(seed, DATA_STREAM)
    components = rng.choice(w.H, size=count, p=w.weights)
    uniforms = rng.random((count, w.M))
    draws = poisson.ppf(uniforms, w.rates[components])
    return np.maximum(draws, 0).astype(np.int64)


@dataclass(slots=True, frozen=True, eq=False)
class Lattice:
    """The box [0, x_max]^M of counts over which pmf sums are taken."""

    x_max: int
    M: int
    points: np.ndarray

    @classmethod
    def box(cls, x_max: int, M: int) -> "Lattice":
        axes = np.indices((x_max + 1,) * M).reshape(M, -1).T
        return cls(x_max=x_max, M=M, points=axes.astype(np.int64))

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


def _check_tol(tol: float) -> None:
    if not (0.0 < tol <= MAX_TOL):
        raise DomainError(f"tolerance must lie in (0, {MAX_TOL}], got {tol!r}")


def tail_cutoff(rate_max: float, eps: float) -> int:
    """Smallest x_max with P(X > x_max) < eps for X ~ Po(rate_max)."""

    x_max = max(int(poisson.isf(eps, rate_max)), 0)
    while poisson.sf(x_max, rate_max) >= eps:
        x_max += 1
    return x_max


def truncation_lattice(w: MixtureParams, q: TrueModel, tol: float) -> Lattice:
    """Lattice box whose per-coordinate tail, at the largest rate in w or q, is < tol/(H·M)."""

    _check_tol(tol)
    if w.M != q.M:
        raise DomainError(f"model has M={w.M} but truth has M={q.M}")
    rate_max = float(max(w.rates.max(), q.rates.max()))
    eps = tol / (max(w.H, q.r) * w.M)
    return Lattice.box(tail_cutoff(rate_max, eps), w.M)


def truth_lattice(q: TrueModel, tol: float) -> Lattice:
    """Lattice box fitted to the truth alone (its mass deficit is < tol)."""

    _check_tol(tol)
    eps = tol / (q.r * q.M)
    return Lattice.box(tail_cutoff(float(q.rates.max()), eps), q.M)


def mass_deficit(w: MixtureParams, lattice: Lattice) -> float:
    """Exact probability mass of p(·|w) outside the lattice box."""

    log_cdf = poisson.logcdf(lattice.x_max, w.rates).sum(axis=1)
    return float(np.sum(w.weights * -np.expm1(log_cdf)))


def truncation_bound(w: MixtureParams, q: TrueModel, tol: float) -> float:
    """The q-mass discarded by the lattice that ``tol`` selects for (w, q)."""

    return mass_deficit(q.params, truncation_lattice(w, q, tol))


def _paired_log_pmfs(
    w: MixtureParams, q: TrueModel, tol: float, lattice: Lattice | None
) -> tuple[np.ndarray, np.ndarray]:
    if lattice is None:
        lattice = truncation_lattice(w, q, tol)
    elif lattice.M != w.M or w.M != q.M:
        raise DomainError("lattice, model and truth must share the data dimension M")
    return mixture_log_pmf_many(lattice.points, w), mixture_log_pmf_many(lattice.points, q.params)


def log_loss(w: MixtureParams, q: TrueModel, tol: float, lattice: Lattice | None = None) -> float:
    """L(w) = -∑_x q(x) log p(x|w) over the truncated lattice."""

    log_p, log_q = _paired_log_pmfs(w, q, tol, lattice)
    return float(-np.sum(np.exp(log_q) * log_p))


def kl_mean_error(
    w: MixtureParams, q: TrueModel, tol: float, lattice: Lattice | None = None
) -> float:
    """K(w) = ∑_x q(x) log(q(x)/p(x|w)).

    Evaluated as ∑ q (u - log1p u) with u = p/q - 1: identical to the KL divergence on the
    full lattice (where ∑(p - q) = 0) and nonnegative term by term on a truncated one.
    """

    log_p, log_q = _paired_log_pmfs(w, q, tol, lattice)
    diff = log_p - log_q
    return float(np.sum(np.exp(log_q) * (np.expm1(diff) - diff)))


def sq_surrogate(
    w: MixtureParams, q: TrueModel, tol: float, lattice: Lattice | None = None
) -> float:
    """∑_x (p(x|w) - q(x))^2 over the truncated lattice."""

    log_p, log_q = _paired_log_pmfs(w, q, tol, lattice)
    return float(np.sum((np.exp(log_p) - np.exp(log_q)) ** 2))


def realizing_parameter(truth: TrueModel, H: int) -> MixtureParams:
    """w0: the truth embedded in an H-component model, padded with zero-weight copies of b_1^*."""

    if H < truth.r:
        raise DomainError(f"H={H} components cannot realize r={truth.r} true components")
    padding = H - truth.r
    weights = np.concatenate([truth.weights, np.zeros(padding)])
    rates = np.vstack([truth.rates, np.repeat(truth.rates[:1], padding, axis=0)])
    return MixtureParams(weights, rates)


def random_true_model(
    r: int,
    M: int,
    seed: int,
    rate_range: tuple[float, float] = (0.5, 5.0),
    min_separation: float = 0.5,
) -> TrueModel:
    """Draw a truth with weights >= 1/(2r) and rate vectors min_separation apart (max-norm)."""

    if r < 1 or M < 1:
        raise DomainError(f"need r >= 1 and M >= 1, got r={r}, M={M}")
    low, high = rate_range
    as_rate_vector([low, high])
    rng = make_rng(seed, DATA_STREAM, r, M)
    rates: list[np.ndarray] = []
    attempts = 0
    while len(rates) < r:
        attempts += 1
        if attempts > 10_000:
            raise DomainError(f"cannot place {r} rate vectors {min_separation} apart in {rate_range}")
        candidate = rng.uniform(low, high, size=M)
        if all(np.max(np.abs(candidate - other)) >= min_separation for other in rates):
            rates.append(candidate)
    weights = 0.5 * rng.dirichlet(np.full(r, 2.0)) + 0.5 / r
    return TrueModel(MixtureParams(weights / weights.sum(), np.vstack(rates)))
