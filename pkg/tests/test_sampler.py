"""Tests for the posterior sampler and the effective sample size estimate."""

import numpy as np
import pytest
from scipy.special import gammaln, logsumexp
from scipy.stats import nbinom

from rlct_lab.config import PriorSpec, SamplerSettings
from rlct_lab.errors import DomainError, SamplerTuningError
from rlct_lab.inference.generalization import predictive_density
from rlct_lab.inference.sampler import PosteriorSampler, effective_sample_size, posterior_mcmc
from rlct_lab.mixture.poisson import sample
from rlct_lab.models import MixtureParams, ModelSignature

SINGLE = ModelSignature(M=1, H=1, r=1)
PAIR = ModelSignature(M=1, H=2, r=1)


def per_draw_density(samples, xs):
    """p(x | w_s) for every x in ``xs`` (rows) and every one-dimensional draw w_s (columns)."""

    counts = np.asarray(xs, dtype=float)[:, None, None]
    rates = samples.rates[None, :, :, 0]
    log_terms = counts * np.log(rates) - rates - gammaln(counts + 1.0) + np.log(samples.weights)[None, :, :]
    return np.exp(logsumexp(log_terms, axis=2))


def monte_carlo_se(trace, chains):
    ess = effective_sample_size(trace.reshape(chains, -1))
    return trace.std() / np.sqrt(ess)


@pytest.fixture(scope="module")
def conjugate_run():
    """One-component posterior, which is Gamma(κ + ∑x, θ + n) when the support box is wide."""

    data = sample(MixtureParams([1.0], [[2.0]]), 50, seed=0)
    prior = PriorSpec()
    settings = SamplerSettings(chains=2, iterations=4000, burn_in=1000, thinning=1, seed=1)
    samples = posterior_mcmc(data, SINGLE, prior, settings)
    shape = prior.kappa + float(data.sum())
    rate = prior.theta + data.shape[0]
    return samples, shape, rate


class TestConjugateCase:
    def test_posterior_mean(self, conjugate_run):
        samples, shape, rate = conjugate_run
        trace = samples.rates[:, 0, 0]
        ess = effective_sample_size(trace.reshape(samples.chains, -1))
        sd = np.sqrt(shape) / rate
        assert abs(trace.mean() - shape / rate) < 4.0 * sd / np.sqrt(ess)
        assert trace.std() == pytest.approx(sd, rel=0.15)

    def test_predictive_is_negative_binomial(self, conjugate_run):
        samples, shape, rate = conjugate_run
        expected = nbinom(shape, rate / (rate + 1.0))
        for x in range(6):
            assert predictive_density(samples, [x]) == pytest.approx(expected.pmf(x), rel=0.03)

    def test_diagnostics(self, conjugate_run):
        samples, _, _ = conjugate_run
        assert samples.accept_w is None
        assert 0.1 <= samples.accept_b <= 0.6
        assert samples.ess_proxy > 100
        assert samples.beta == 1.0
        assert samples.n == 50


class TestConjugateAcrossSeeds:
    def test_fifty_seeds(self):
        prior = PriorSpec()
        xs = range(6)
        mean_misses, predictive_misses, z_scores = 0, 0, []
        for seed in range(50):
            data = sample(MixtureParams([1.0], [[2.0]]), 50, seed=seed)
            settings = SamplerSettings(chains=2, iterations=1500, burn_in=300, thinning=1, seed=seed)
            samples = posterior_mcmc(data, SINGLE, prior, settings)
            shape = prior.kappa + float(data.sum())
            rate = prior.theta + data.shape[0]

            trace = samples.rates[:, 0, 0]
            z = (trace.mean() - shape / rate) / monte_carlo_se(trace, samples.chains)
            z_scores.append(z)
            mean_misses += abs(z) > 3.0

            expected = nbinom(shape, rate / (rate + 1.0)).pmf(list(xs))
            densities = per_draw_density(samples, xs)
            for row, target in zip(densities, expected):
                predictive_misses += abs(row.mean() - target) > 3.0 * monte_carlo_se(row, samples.chains)

        assert mean_misses <= 2
        assert predictive_misses <= 9
        assert abs(np.mean(z_scores)) < 0.6


class TestLabelPermutation:
    def test_predictive_ignores_initial_labels(self):
        data = sample(MixtureParams([0.3, 0.7], [[1.0], [5.0]]), 120, seed=11)
        settings = SamplerSettings(chains=2, iterations=2500, burn_in=500, thinning=1, seed=4)
        init = MixtureParams([0.2, 0.8], [[0.8], [4.5]])
        swapped = MixtureParams([0.8, 0.2], [[4.5], [0.8]])
        xs = range(9)

        first = per_draw_density(PosteriorSampler(PAIR, PriorSpec(), settings).run(data, init=init), xs)
        second = per_draw_density(PosteriorSampler(PAIR, PriorSpec(), settings).run(data, init=swapped), xs)
        for a, b in zip(first, second):
            error = np.hypot(monte_carlo_se(a, 2), monte_carlo_se(b, 2))
            assert abs(a.mean() - b.mean()) < 4.0 * error + 1e-4


class TestPriorRedraws:
    def test_near_zero_temperature_recovers_prior(self):
        data = sample(MixtureParams([1.0], [[2.0]]), 200, seed=3)
        prior = PriorSpec()
        settings = SamplerSettings(chains=2, iterations=2000, burn_in=200, thinning=1, seed=9)
        samples = posterior_mcmc(data, PAIR, prior, settings, beta=1e-6)
        # truncation at [0.05, 30] barely moves the Gamma(2, 1) mean
        assert samples.rates.mean() == pytest.approx(prior.kappa / prior.theta, abs=0.15)
        assert samples.weights[:, 0].mean() == pytest.approx(0.5, abs=0.05)

    def test_random_walk_only_still_samples(self):
        data = sample(MixtureParams([1.0], [[2.0]]), 60, seed=5)
        settings = SamplerSettings(chains=1, iterations=300, burn_in=100, seed=2, adapt_window=25, prior_redraws=False)
        samples = posterior_mcmc(data, PAIR, PriorSpec(), settings)
        assert samples.size == settings.draws_per_chain
        assert samples.accept_w is not None


class TestPosteriorMcmc:
    settings = SamplerSettings(chains=2, iterations=300, burn_in=100, thinning=3, seed=5, adapt_window=25)

    @pytest.fixture
    def data(self):
        return sample(MixtureParams([0.5, 0.5], [[1.0], [4.0]]), 80, seed=2)

    def test_draw_count_and_shapes(self, data):
        samples = posterior_mcmc(data, PAIR, PriorSpec(), self.settings)
        assert samples.size == self.settings.chains * self.settings.draws_per_chain
        assert samples.weights.shape == (samples.size, 2)
        assert samples.rates.shape == (samples.size, 2, 1)
        np.testing.assert_allclose(samples.weights.sum(axis=1), 1.0, rtol=1e-12)
        assert np.all(samples.rates >= PriorSpec().b_lo)
        assert samples.accept_w is not None

    def test_deterministic(self, data):
        first = posterior_mcmc(data, PAIR, PriorSpec(), self.settings)
        second = posterior_mcmc(data, PAIR, PriorSpec(), self.settings)
        np.testing.assert_array_equal(first.weights, second.weights)
        np.testing.assert_array_equal(first.rates, second.rates)

    def test_seed_changes_chain(self, data):
        first = posterior_mcmc(data, PAIR, PriorSpec(), self.settings)
        other = SamplerSettings(chains=2, iterations=300, burn_in=100, thinning=3, seed=6, adapt_window=25)
        second = posterior_mcmc(data, PAIR, PriorSpec(), other)
        assert not np.array_equal(first.rates, second.rates)

    def test_data_order_does_not_matter(self, data):
        shuffled = data[np.random.default_rng(0).permutation(data.shape[0])]
        first = posterior_mcmc(data, PAIR, PriorSpec(), self.settings)
        second = posterior_mcmc(shuffled, PAIR, PriorSpec(), self.settings)
        np.testing.assert_array_equal(first.rates, second.rates)

    def test_tempered_run(self, data):
        samples = posterior_mcmc(data, PAIR, PriorSpec(), self.settings, beta=0.25)
        assert samples.beta == 0.25

    def test_initial_state(self, data):
        init = MixtureParams([0.5, 0.5], [[1.0], [4.0]])
        samples = PosteriorSampler(PAIR, PriorSpec(), self.settings).run(data, init=init)
        assert samples.size == self.settings.chains * self.settings.draws_per_chain


class TestSamplerErrors:
    settings = SamplerSettings(chains=1, iterations=50, burn_in=10)

    def test_empty_data(self):
        with pytest.raises(DomainError):
            posterior_mcmc(np.zeros((0, 1), dtype=np.int64), SINGLE, PriorSpec(), self.settings)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            posterior_mcmc(np.ones((5, 2), dtype=np.int64), SINGLE, PriorSpec(), self.settings)

    def test_bad_temperature(self):
        with pytest.raises(DomainError):
            posterior_mcmc(np.ones((5, 1), dtype=np.int64), SINGLE, PriorSpec(), self.settings, beta=0.0)

    def test_mismatched_init(self):
        with pytest.raises(DomainError):
            posterior_mcmc(
                np.ones((5, 1), dtype=np.int64),
                SINGLE,
                PriorSpec(),
                self.settings,
                init=MixtureParams([0.5, 0.5], [[1.0], [2.0]]),
            )

    def test_frozen_rates_raise_tuning_error(self):
        prior = PriorSpec(b_lo=1.0, b_hi=1.0000001)
        settings = SamplerSettings(chains=1, iterations=50, burn_in=0)
        with pytest.raises(SamplerTuningError):
            posterior_mcmc(np.ones((20, 1), dtype=np.int64), SINGLE, prior, settings)


class TestEffectiveSampleSize:
    def test_independent_draws(self):
        draws = np.random.default_rng(0).standard_normal(4000)
        ess = effective_sample_size(draws)
        assert 2000 <= ess <= 8000

    def test_autocorrelated_draws(self):
        rng = np.random.default_rng(1)
        noise = rng.standard_normal(20000)
        trace = np.empty_like(noise)
        trace[0] = noise[0]
        for t in range(1, trace.size):
            trace[t] = 0.9 * trace[t - 1] + noise[t]
        assert 500 <= effective_sample_size(trace) <= 2000

    def test_chains_add_up(self):
        rng = np.random.default_rng(2)
        chains = rng.standard_normal((2, 1000))
        total = effective_sample_size(chains)
        assert total == pytest.approx(effective_sample_size(chains[0]) + effective_sample_size(chains[1]))

    def test_constant_trace(self):
        assert effective_sample_size(np.ones(30)) == 30.0

    def test_empty_trace(self):
        with pytest.raises(DomainError):
            effective_sample_size(np.array([]))
