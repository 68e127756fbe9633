"""Random-walk Metropolis-within-Gibbs for Poisson mixture posteriors.

The weights move as one block in additive log-ratio coordinates; the log-rate vector of each
component is its own block. Proposal scales adapt during burn-in and are frozen afterwards.
Each block is also offered a fresh prior draw every iteration, accepted on the tempered
likelihood ratio alone; this moves near-empty components between distant rates, which the
random walk cannot do at large n. A likelihood exponent ``beta`` < 1 gives the tempered posterior used by WBIC.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..config import PriorSpec, SamplerSettings
from ..errors import DomainError, SamplerTuningError
from ..mixture.poisson import component_log_pmf
from ..models import MixtureParams, ModelSignature
from ..utils.seeding import CHAIN_STREAM, INIT_STREAM, make_rng

logger = logging.getLogger(__name__)

TARGET_ACCEPTANCE = (0.2, 0.4)
SHRINK = 0.7
GROW = 1.4


def effective_sample_size(trace: np.ndarray) -> float:
    """Initial positive sequence estimate of the effective sample size.

    A 2-D trace is read as (chains, draws) and the per-chain estimates are added up.
    """

    values = np.asarray(trace, dtype=float)
    if values.ndim == 2:
        return float(sum(effective_sample_size(chain) for chain in values))
    if values.ndim != 1 or values.size == 0:
        raise DomainError("a trace must be a nonempty 1-D or 2-D array")

    size = values.size
    centered = values - values.mean()
    variance = float(np.dot(centered, centered)) / size
    if size < 4 or variance <= 0.0:
        return float(size)

    padded = 1 << (2 * size - 1).bit_length()
    spectrum = np.fft.rfft(centered, n=padded)
    autocov = np.fft.irfft(spectrum * np.conj(spectrum), n=padded)[:size] / size
    rho = autocov / autocov[0]

    tau = -1.0
    for lag in range(0, size - 1, 2):
        pair = rho[lag] + rho[lag + 1]
        if pair <= 0.0:
            break
        tau += 2.0 * pair
    return float(size / max(tau, 1e-12)) if tau > 0 else float(size)


@dataclass(slots=True, frozen=True, eq=False)
class PosteriorSamples:
    """Thinned post-burn-in draws pooled over chains, in chain order."""

    weights: np.ndarray
    rates: np.ndarray
    log_likelihood: np.ndarray
    chains: int
    beta: float
    n: int
    accept_w: float | None
    accept_b: float

    def __post_init__(self) -> None:
        if self.weights.shape[0] == 0:
            raise DomainError("a posterior sample set needs at least one draw")

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def H(self) -> int:
        return int(self.weights.shape[1])

    @property
    def M(self) -> int:
        return int(self.rates.shape[2])

    def draw(self, index: int) -> MixtureParams:
        return MixtureParams(self.weights[index], self.rates[index])

    @property
    def ess_proxy(self) -> float:
        """ESS of the log-likelihood trace."""

        return effective_sample_size(self.log_likelihood.reshape(self.chains, -1))

    @classmethod
    def pinned(cls, w: MixtureParams, n: int = 1) -> "PosteriorSamples":
        """A degenerate sample set holding the single draw ``w``."""

        return cls(
            weights=np.array(w.weights)[None, :],
            rates=np.array(w.rates)[None, :, :],
            log_likelihood=np.zeros(1),
            chains=1,
            beta=1.0,
            n=n,
            accept_w=None,
            accept_b=0.0,
        )


@dataclass(slots=True)
class _ChainState:
    weights: np.ndarray
    rates: np.ndarray
    components: np.ndarray
    log_lik: float
    log_prior: float


class PosteriorSampler:
    """Metropolis-within-Gibbs over (a, b) for a fixed model signature and prior."""

    def __init__(self, sig: ModelSignature, prior: PriorSpec, settings: SamplerSettings) -> None:
        self._sig = sig
        self._prior = prior
        self._settings = settings

    def run(
        self,
        data: np.ndarray,
        beta: float = 1.0,
        stream: int = CHAIN_STREAM,
        init: MixtureParams | None = None,
    ) -> PosteriorSamples:
        """Sample p(w | X^n) ∝ φ(w) ∏ p(X_i | w)^beta."""

        counts = np.asarray(data)
        if counts.ndim == 1 and self._sig.M == 1:
            counts = counts.reshape(-1, 1)
        if counts.ndim != 2 or counts.shape[0] == 0:
            raise DomainError("posterior sampling needs a nonempty (n, M) data array")
        if counts.shape[1] != self._sig.M:
            raise DomainError(f"data has M={counts.shape[1]}, model has M={self._sig.M}")
        if np.any(counts < 0):
            raise DomainError("counts must be >= 0")
        if not 0.0 < beta <= 1.0:
            raise DomainError(f"inverse temperature must lie in (0, 1], got {beta}")
        if init is not None and (init.H != self._sig.H or init.M != self._sig.M):
            raise DomainError("initial state does not match the model signature")

        points, multiplicity = np.unique(counts.astype(np.int64), axis=0, return_counts=True)
        multiplicity = multiplicity.astype(float)

        weights, rates, log_lik = [], [], []
        accepted_w, accepted_b = [], []
        for chain in range(self._settings.chains):
            result = self._run_chain(points, multiplicity, beta, stream, chain, init)
            weights.append(result[0])
            rates.append(result[1])
            log_lik.append(result[2])
            accepted_w.append(result[3])
            accepted_b.append(result[4])

        return PosteriorSamples(
            weights=np.concatenate(weights),
            rates=np.concatenate(rates),
            log_likelihood=np.concatenate(log_lik),
            chains=self._settings.chains,
            beta=beta,
            n=int(counts.shape[0]),
            accept_w=None if self._sig.H == 1 else float(np.mean(accepted_w)),
            accept_b=float(np.mean(accepted_b)),
        )

    def _log_likelihood(self, components: np.ndarray, weights: np.ndarray, multiplicity: np.ndarray) -> float:
        with np.errstate(divide="ignore"):
            log_w = np.log(weights)
        return float(multiplicity @ logsumexp(components + log_w[None, :], axis=1))

    def _log_prior(self, weights: np.ndarray, rates: np.ndarray) -> float:
        return self._prior.log_density(weights, rates)

    def _run_chain(
        self,
        points: np.ndarray,
        multiplicity: np.ndarray,
        beta: float,
        stream: int,
        chain: int,
        init: MixtureParams | None,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, float, float]:
        settings = self._settings
        H, M = self._sig.H, self._sig.M
        rng = make_rng(settings.seed, stream, chain)
        if init is None:
            init = self._prior.sample(make_rng(settings.seed, INIT_STREAM, stream, chain), H, M)

        state = _ChainState(
            weights=np.array(init.weights),
            rates=np.clip(np.array(init.rates), self._prior.b_lo, self._prior.b_hi),
            components=np.empty(0),
            log_lik=0.0,
            log_prior=0.0,
        )
        state.weights = np.maximum(state.weights, 1e-12)
        state.weights /= state.weights.sum()
        state.components = component_log_pmf(points, state.rates)
        state.log_lik = self._log_likelihood(state.components, state.weights, multiplicity)
        state.log_prior = self._log_prior(state.weights, state.rates)

        weight_scale = settings.weight_scale
        rate_scales = np.full(H, settings.rate_scale)
        window_w, window_b = 0, np.zeros(H)
        kept_w, kept_b = 0, np.zeros(H)
        draws_w, draws_b, draws_ll = [], [], []
        redrawn = 0

        for iteration in range(settings.iterations):
            if H > 1:
                accepted = self._step_weights(state, weight_scale, multiplicity, beta, rng)
                window_w += accepted
                if iteration >= settings.burn_in:
                    kept_w += accepted
            for k in range(H):
                accepted = self._step_rates(state, k, rate_scales[k], points, multiplicity, beta, rng)
                window_b[k] += accepted
                if iteration >= settings.burn_in:
                    kept_b[k] += accepted
            if settings.prior_redraws:
                if H > 1:
                    redrawn += self._redraw_weights(state, multiplicity, beta, rng)
                for k in range(H):
                    redrawn += self._redraw_rate(state, k, points, multiplicity, beta, rng)

            if iteration < settings.burn_in and (iteration + 1) % settings.adapt_window == 0:
                weight_scale = _adapt(weight_scale, window_w / settings.adapt_window)
                for k in range(H):
                    rate_scales[k] = _adapt(rate_scales[k], window_b[k] / settings.adapt_window)
                logger.debug(
                    "chain %d iteration %d: weight scale %.3g, rate scales %s",
                    chain,
                    iteration + 1,
                    weight_scale,
                    np.round(rate_scales, 4).tolist(),
                )
                window_w, window_b = 0, np.zeros(H)

            if iteration >= settings.burn_in and (iteration - settings.burn_in) % settings.thinning == 0:
                draws_w.append(state.weights.copy())
                draws_b.append(state.rates.copy())
                draws_ll.append(state.log_lik)

        if settings.prior_redraws:
            logger.debug("chain %d: %d prior redraws accepted", chain, redrawn)
        kept = settings.iterations - settings.burn_in
        rate_acceptance = kept_b / kept
        if H > 1 and kept_w == 0:
            raise SamplerTuningError(
                f"chain {chain}: weight block accepted nothing after burn-in (scale {weight_scale:.3g})"
            )
        if np.any(kept_b == 0):
            stuck = np.flatnonzero(kept_b == 0).tolist()
            raise SamplerTuningError(
                f"chain {chain}: rate blocks {stuck} accepted nothing after burn-in "
                f"(scales {rate_scales[stuck].tolist()})"
            )

        return (
            np.array(draws_w),
            np.array(draws_b),
            np.array(draws_ll),
            kept_w / kept,
            float(rate_acceptance.mean()),
        )

    def _step_weights(
        self,
        state: _ChainState,
        scale: float,
        multiplicity: np.ndarray,
        beta: float,
        rng: np.random.Generator,
    ) -> bool:
        log_w = np.log(state.weights)
        ratios = log_w[:-1] - log_w[-1]
        proposal = np.append(ratios + scale * rng.standard_normal(ratios.size), 0.0)
        weights = np.exp(proposal - logsumexp(proposal))
        if np.any(weights <= 0.0):
            return False

        log_lik = self._log_likelihood(state.components, weights, multiplicity)
        log_prior = self._log_prior(weights, state.rates)
        # Jacobian of the log-ratio map is ∏_k a_k.
        current = beta * state.log_lik + state.log_prior + float(np.sum(log_w))
        candidate = beta * log_lik + log_prior + float(np.sum(np.log(weights)))
        if math.log(rng.random()) < candidate - current:
            state.weights, state.log_lik, state.log_prior = weights, log_lik, log_prior
            return True
        return False

    def _step_rates(
        self,
        state: _ChainState,
        k: int,
        scale: float,
        points: np.ndarray,
        multiplicity: np.ndarray,
        beta: float,
        rng: np.random.Generator,
    ) -> bool:
        current_rate = state.rates[k]
        proposed_rate = current_rate * np.exp(scale * rng.standard_normal(current_rate.size))
        if np.any(proposed_rate < self._prior.b_lo) or np.any(proposed_rate > self._prior.b_hi):
            return False

        rates = state.rates.copy()
        rates[k] = proposed_rate
        components = state.components.copy()
        components[:, k] = component_log_pmf(points, proposed_rate[None, :])[:, 0]
        log_lik = self._log_likelihood(components, state.weights, multiplicity)
        log_prior = self._log_prior(state.weights, rates)
        # Jacobian of the log map is ∏_m b_km.
        current = beta * state.log_lik + state.log_prior + float(np.sum(np.log(current_rate)))
        candidate = beta * log_lik + log_prior + float(np.sum(np.log(proposed_rate)))
        if math.log(rng.random()) < candidate - current:
            state.rates, state.components = rates, components
            state.log_lik, state.log_prior = log_lik, log_prior
            return True
        return False

    def _redraw_weights(
        self,
        state: _ChainState,
        multiplicity: np.ndarray,
        beta: float,
        rng: np.random.Generator,
    ) -> bool:
        # Proposal is the Dirichlet prior itself, so only the likelihood ratio remains.
        weights = rng.dirichlet(np.full(state.weights.size, self._prior.alpha))
        if np.any(weights <= 0.0):
            return False
        log_lik = self._log_likelihood(state.components, weights, multiplicity)
        if math.log(rng.random()) < beta * (log_lik - state.log_lik):
            state.weights, state.log_lik = weights, log_lik
            state.log_prior = self._log_prior(weights, state.rates)
            return True
        return False

    def _redraw_rate(
        self,
        state: _ChainState,
        k: int,
        points: np.ndarray,
        multiplicity: np.ndarray,
        beta: float,
        rng: np.random.Generator,
    ) -> bool:
        # Proposal is the truncated Gamma prior of one component, so only the likelihood ratio remains.
        proposed_rate = self._prior.sample_rates(rng, state.rates.shape[1])
        rates = state.rates.copy()
        rates[k] = proposed_rate
        components = state.components.copy()
        components[:, k] = component_log_pmf(points, proposed_rate[None, :])[:, 0]
        log_lik = self._log_likelihood(components, state.weights, multiplicity)
        if math.log(rng.random()) < beta * (log_lik - state.log_lik):
            state.rates, state.components, state.log_lik = rates, components, log_lik
            state.log_prior = self._log_prior(state.weights, rates)
            return True
        return False


def _adapt(
scale: float, acceptance: float) -> float:
    low, high = TARGET_ACCEPTANCE
    if acceptance < low:
        return scale * SHRINK
    if acceptance > high:
        return scale * GROW
    return scale


def posterior_mcmc(
    data: np.ndarray,
    sig: ModelSignature,
    prior: PriorSpec,
    settings: SamplerSettings,
    beta: float = 1.0,
    stream: int = CHAIN_STREAM,
    init: MixtureParams | None = None,
) -> PosteriorSamples:
    """Draw ``settings.chains`` chains from the (optionally tempered) posterior."""

    return PosteriorSampler(sig, prior, settings).run(data, beta=beta, stream=stream, init=init)
