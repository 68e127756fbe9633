"""Tests for the moment-difference singularity, its zero set and the squared-ratio bounds."""

import numpy as np
import pytest

from rlct_lab.algebra.probes import fit_to_domain, ratio_bound_probe
from rlct_lab.algebra.vandermonde import (
    VandermondeInstance,
    compute_inv_sets,
    group_local_split,
    h_function,
    h_prime_function,
    local_ideal_form,
    sample_variety_point,
    variety_membership,
)
from rlct_lab.errors import AmbiguityError, DomainError, GroupAssignmentError
from rlct_lab.mixture.poisson import kl_mean_error, sq_surrogate
from rlct_lab.models import MixtureParams, PartitionSpec, TrueModel


@pytest.fixture
def truth_1d() -> TrueModel:
    return TrueModel.from_lists([1.0], [[1.0]])


@pytest.fixture
def truth_two() -> TrueModel:
    return TrueModel.from_lists([0.4, 0.6], [[1.0], [3.0]])


class TestHFunction:
    def test_hand_example(self, truth_1d):
        inst = VandermondeInstance(MixtureParams([1.0], [[2.0]]), truth_1d)
        assert h_function(inst) == pytest.approx(1.0, rel=1e-15)

    def test_zero_at_truth(self, truth_two):
        inst = VandermondeInstance(truth_two.params, truth_two)
        assert h_function(inst) == 0.0
        assert h_prime_function(inst) == 0.0

    def test_permutation_invariant(self, truth_two):
        w = MixtureParams([0.2, 0.5, 0.3], [[0.8], [2.5], [4.0]])
        base = h_function(VandermondeInstance(w, truth_two))
        permuted = h_function(VandermondeInstance(w.permuted([2, 0, 1]), truth_two))
        assert permuted == pytest.approx(base, rel=1e-12)

    def test_dimension_mismatch(self, truth_two):
        with pytest.raises(DomainError):
            VandermondeInstance(MixtureParams([1.0], [[1.0, 2.0]]), truth_two)

    def test_too_few_components(self, truth_two):
        with pytest.raises(DomainError):
            VandermondeInstance(MixtureParams([1.0], [[1.0]]), truth_two)


class TestInvSets:
    def test_all_on_first_rate(self, truth_1d):
        inst = VandermondeInstance(MixtureParams([0.5, 0.5], [[1.0], [1.0]]), truth_1d)
        sets = compute_inv_sets(inst)
        assert sets.inv == (frozenset({0, 1}),)
        assert sets.inv0 == frozenset()

    def test_nothing_matches(self, truth_two):
        inst = VandermondeInstance(MixtureParams([0.5, 0.5], [[2.0], [5.0]]), truth_two)
        sets = compute_inv_sets(inst)
        assert sets.inv == (frozenset(), frozenset())
        assert sets.inv0 == frozenset({0, 1})

    def test_mixed(self, truth_two):
        inst = VandermondeInstance(MixtureParams([0.2, 0.2, 0.6], [[1.0], [1.0], [7.0]]), truth_two)
        sets = compute_inv_sets(inst)
        assert sets.inv == (frozenset({0, 1}), frozenset())
        assert sets.inv0 == frozenset({2})

    def test_ambiguous_match(self):
        truth = TrueModel.from_lists([0.5, 0.5], [[1.0], [1.0 + 2e-7]])
        inst = VandermondeInstance(MixtureParams([0.5, 0.5], [[1.0], [1.0]]), truth)
        with pytest.raises(AmbiguityError):
            compute_inv_sets(inst, tol=1e-6)

    def test_nonpositive_tolerance(self, truth_1d):
        inst = VandermondeInstance(truth_1d.params, truth_1d)
        with pytest.raises(DomainError):
            compute_inv_sets(inst, tol=0.0)


class TestMembership:
    def test_split_weight_is_member(self, truth_1d):
        inst = VandermondeInstance(MixtureParams([0.3, 0.7], [[1.0], [1.0]]), truth_1d)
        certificate = variety_membership(inst)
        assert certificate
        assert certificate.violations == ()

    def test_weight_off_truth_is_not_member(self, truth_1d):
        inst = VandermondeInstance(MixtureParams([0.5, 0.5], [[1.0], [2.5]]), truth_1d)
        certificate = variety_membership(inst)
        assert not certificate
        assert any("Inv_0" in violation for violation in certificate.violations)

    def test_empty_group_reported(self, truth_two):
        inst = VandermondeInstance(MixtureParams([1.0, 0.0], [[1.0], [5.0]]), truth_two)
        certificate = variety_membership(inst)
        assert not certificate.member
        assert "Inv_2 is empty" in certificate.violations


class TestSampleVarietyPoint:
    def test_singleton_groups_return_truth(self, truth_two):
        w = sample_variety_point(PartitionSpec(2, (1, 1)), truth_two, seed=4)
        np.testing.assert_allclose(w.weights, truth_two.weights, rtol=1e-14)
        np.testing.assert_array_equal(w.rates, truth_two.rates)

    @pytest.mark.parametrize("sizes", [(2, 1), (1, 1, 1), (2, 1, 2), (1, 2, 1, 1)])
    def test_point_lies_on_variety(self, truth_two, sizes):
        spec = PartitionSpec(2, sizes)
        w = sample_variety_point(spec, truth_two, seed=13)
        assert w.H == sum(sizes)
        inst = VandermondeInstance(w, truth_two)
        assert variety_membership(inst, tol=1e-12)
        assert h_function(inst) <= 1e-20
        assert kl_mean_error(w, truth_two, 1e-10) <= 1e-10
        assert sq_surrogate(w, truth_two, 1e-10) <= 1e-12
        assert all(value <= 1e-20 for value in group_local_split(inst, spec))
        assert all(value <= 1e-20 for value in local_ideal_form(inst, spec))

    def test_given_ghost_centers(self, truth_two):
        spec = PartitionSpec(2, (1, 1, 2), ghost_centers=((6.0,),))
        w = sample_variety_point(spec, truth_two, seed=0)
        np.testing.assert_array_equal(w.rates[2:, 0], [6.0, 6.0])
        np.testing.assert_array_equal(w.weights[2:], [0.0, 0.0])

    def test_ghost_center_on_truth_rejected(self, truth_two):
        spec = PartitionSpec(2, (1, 1, 1), ghost_centers=((3.0,),))
        with pytest.raises(DomainError):
            sample_variety_point(spec, truth_two, seed=0)

    def test_ghost_center_near_truth_rejected(self, truth_two):
        spec = PartitionSpec(2, (1, 1, 1), ghost_centers=((3.05,),))
        with pytest.raises(DomainError):
            sample_variety_point(spec, truth_two, seed=0)

    def test_ghost_centers_near_each_other_rejected(self, truth_two):
        spec = PartitionSpec(2, (1, 1, 1, 1), ghost_centers=((6.0,), (6.05,)))
        with pytest.raises(DomainError):
            sample_variety_point(spec, truth_two, seed=0)

    def test_drawn_ghost_centers_keep_their_distance(self, truth_two):
        spec = PartitionSpec(2, (1, 1, 1, 1, 1))
        for seed in range(20):
            w = sample_variety_point(spec, truth_two, seed=seed)
            rates = w.rates[:, 0]
            gaps = np.abs(rates[:, None] - rates[None, :])[np.triu_indices(5, k=1)]
            assert gaps.min() >= 0.1
            assert rates[2:].max() <= 30.0

    def test_wrong_true_count(self, truth_two):
        with pytest.raises(GroupAssignmentError):
            sample_variety_point(PartitionSpec(1, (2,)), truth_two, seed=0)

    def test_deterministic(self, truth_two):
        spec = PartitionSpec(2, (3, 1))
        first = sample_variety_point(spec, truth_two, seed=5)
        second = sample_variety_point(spec, truth_two, seed=5)
        np.testing.assert_array_equal(first.weights, second.weights)


class TestLocalSplit:
    def test_single_group_equals_h_on_group_box(self, truth_1d):
        w = MixtureParams([0.2, 0.3, 0.5], [[0.7], [1.4], [2.2]])
        inst = VandermondeInstance(w, truth_1d)
        spec = PartitionSpec(1, (3,))
        (split,) = group_local_split(inst, spec)
        assert split == pytest.approx(h_function(inst, box_max=3), rel=1e-12)

    def test_sizes_must_match_model(self, truth_1d):
        inst = VandermondeInstance(MixtureParams([0.5, 0.5], [[1.0], [1.0]]), truth_1d)
        with pytest.raises(GroupAssignmentError):
            group_local_split(inst, PartitionSpec(1, (3,)))
        with pytest.raises(GroupAssignmentError):
            local_ideal_form(inst, PartitionSpec(1, (1, 2)))


class TestRatioProbe:
    def _h(self, truth):
        return lambda w: h_function(VandermondeInstance(w, truth))

    def test_identical_functions(self, truth_two):
        f = self._h(truth_two)
        report = ratio_bound_probe(f, f, truth_two.params, directions=5)
        assert report.low == pytest.approx(1.0)
        assert report.high == pytest.approx(1.0)

    def test_constant_factor(self, truth_two):
        f = self._h(truth_two)
        report = ratio_bound_probe(f, lambda w: 2.0 * f(w), truth_two.params, directions=5)
        assert report.low == pytest.approx(4.0)
        assert report.high == pytest.approx(4.0)

    def test_functions_must_vanish_at_center(self, truth_two):
        f = self._h(truth_two)
        with pytest.raises(DomainError):
            ratio_bound_probe(f, lambda w: 1.0, truth_two.params)

    def test_bad_arguments(self, truth_two):
        f = self._h(truth_two)
        with pytest.raises(DomainError):
            ratio_bound_probe(f, f, truth_two.params, directions=0)
        with pytest.raises(DomainError):
            ratio_bound_probe(f, f, truth_two.params, scales=[1e-2, 0.0])

    def test_regular_kl_against_h(self):
        truth = TrueModel.from_lists([1.0], [[2.0, 1.5]])
        report = ratio_bound_probe(
            lambda w: kl_mean_error(w, truth, 1e-10),
            self._h(truth),
            truth.params,
            directions=20,
            seed=3,
        )
        assert np.isfinite(report.low) and np.isfinite(report.high)
        assert report.low > 0.0
        assert report.bounded(10.0)

    def test_every_direction_evaluated_near_boundary(self, truth_two):
        w_star = sample_variety_point(PartitionSpec(2, (2, 1, 1), ghost_centers=((6.0,),)), truth_two, seed=2)
        report = ratio_bound_probe(
            lambda w: kl_mean_error(w, truth_two, 1e-10),
            self._h(truth_two),
            w_star,
            directions=20,
            seed=0,
        )
        assert [bucket.skipped for bucket in report.per_scale] == [0, 0, 0, 0]
        assert [bucket.evaluated for bucket in report.per_scale] == [20, 20, 20, 20]


class TestFitToDomain:
    def test_short_direction_untouched(self, truth_two):
        d_weights = np.array([0.1, -0.1])
        d_rates = np.array([[0.5], [-0.5]])
        fitted_weights, fitted_rates = fit_to_domain(truth_two.params, d_weights, d_rates, 0.1)
        np.testing.assert_array_equal(fitted_weights, d_weights)
        np.testing.assert_array_equal(fitted_rates, d_rates)

    def test_long_direction_capped_at_half_reach(self, truth_two):
        d_weights = np.array([-1.0, 1.0])
        d_rates = np.zeros((2, 1))
        fitted_weights, _ = fit_to_domain(truth_two.params, d_weights, d_rates, 1.0)
        # weight 0.4 is reached at step 0.4; the cap is half of that
        np.testing.assert_allclose(fitted_weights, [-0.2, 0.2])

    def test_rising_coordinates_never_limit(self, truth_two):
        d_weights = np.zeros(2)
        d_rates = np.array([[1.0], [2.0]])
        _, fitted_rates = fit_to_domain(truth_two.params, d_weights, d_rates, 10.0)
        np.testing.assert_array_equal(fitted_rates, d_rates)
