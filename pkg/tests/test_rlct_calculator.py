"""Tests for the exact learning coefficient values and their combinators."""

import itertools
from fractions import Fraction

import pytest

from rlct_lab.algebra.rlct import (
    TermKind,
    branch,
    combine_product,
    combine_sum,
    expected_generalization,
    iter_partitions,
    local_lambda,
    local_lambda_terms,
    regular_reference,
    rlct_closed_form,
    rlct_enumerate,
)
from rlct_lab.errors import BudgetExceededError, DomainError
from rlct_lab.models import ModelSignature, PartitionSpec, RlctSource, RlctValue

GRID = [
    ModelSignature(M=M, H=H, r=r)
    for M in (1, 2, 3)
    for H in range(1, 9)
    for r in range(1, H + 1)
]


def value(fraction: Fraction) -> RlctValue:
    return RlctValue(fraction, RlctSource.COMBINATOR)


class TestClosedForm:
    @pytest.mark.parametrize(
        ("M", "H", "r", "expected"),
        [
            (1, 3, 2, Fraction(7, 4)),
            (2, 4, 2, Fraction(7, 2)),
            (1, 2, 1, Fraction(3, 4)),
            (3, 5, 1, Fraction(7, 2)),
        ],
    )
    def test_examples(self, M, H, r, expected):
        result = rlct_closed_form(ModelSignature(M=M, H=H, r=r))
        assert result.value == expected
        assert result.source is RlctSource.CLOSED_FORM

    @pytest.mark.parametrize("r", range(1, 7))
    def test_regular_one_dimensional(self, r):
        sig = ModelSignature(M=1, H=r, r=r)
        assert rlct_closed_form(sig).value == Fraction(2 * r - 1, 2) == Fraction(sig.d, 2)

    def test_regular_reference(self):
        assert regular_reference(ModelSignature(M=1, H=2, r=1)).value == Fraction(3, 2)
        assert regular_reference(ModelSignature(M=3, H=2, r=1)).value == Fraction(7, 2)

    def test_regular_consistency_on_grid(self):
        for sig in GRID:
            if sig.H == sig.r:
                assert rlct_closed_form(sig).value == regular_reference(sig).value

    def test_strictly_below_regular_when_singular(self):
        for sig in GRID:
            if sig.H > sig.r:
                assert rlct_closed_form(sig).value < regular_reference(sig).value

    def test_monotone_in_h_and_r(self):
        for M in (1, 2, 3):
            for r in range(1, 8):
                values = [rlct_closed_form(ModelSignature(M, H, r)).value for H in range(r, 9)]
                assert values == sorted(values)
            for H in range(1, 9):
                values = [rlct_closed_form(ModelSignature(M, H, r)).value for r in range(1, H + 1)]
                assert values == sorted(values)

    def test_r_above_h_rejected(self):
        with pytest.raises(DomainError):
            ModelSignature(M=1, H=2, r=3)

    def test_branch(self):
        assert branch(ModelSignature(1, 2, 1)) == "M=1"
        assert branch(ModelSignature(2, 2, 1)) == "M>1"


class TestLocalLambda:
    def test_singleton_groups(self):
        for r in range(1, 5):
            assert local_lambda(PartitionSpec(r, (1,) * r), 1).value == r - Fraction(1, 2)

    def test_single_true_group(self):
        for H in range(1, 9):
            assert local_lambda(PartitionSpec(1, (H,)), 1).value == Fraction(H + 1, 4)

    def test_one_ghost(self):
        result = local_lambda(PartitionSpec(2, (2, 1, 1)), 1)
        assert result.value == Fraction(9, 4)
        assert result.source is RlctSource.LOCAL

    def test_multidimensional_is_partition_independent(self):
        sig = ModelSignature(M=2, H=5, r=2)
        values = {local_lambda(spec, 2).value for spec in iter_partitions(sig)}
        assert values == {Fraction(2 * 2 + 5 - 1, 2)}

    @pytest.mark.parametrize("M", [1, 2, 3])
    def test_terms_add_up(self, M):
        for spec in iter_partitions(ModelSignature(M=M, H=6, r=2)):
            terms = local_lambda_terms(spec, M)
            assert terms[0].kind is TermKind.SIMPLEX
            assert len(terms) == spec.r_prime + 1
            assert sum(term.value for term in terms) == local_lambda(spec, M).value

    def test_term_kinds(self):
        terms = local_lambda_terms(PartitionSpec(2, (3, 1, 2)), 1)
        assert [term.kind for term in terms] == [
            TermKind.SIMPLEX,
            TermKind.TYPE1,
            TermKind.TYPE2,
            TermKind.TYPE3,
        ]
        assert [term.value for term in terms] == [
            Fraction(-1, 2),
            Fraction(3, 2),
            Fraction(1),
            Fraction(1),
        ]


class TestEnumerate:
    def test_matches_closed_form_on_grid(self):
        for sig in GRID:
            assert rlct_enumerate(sig).value.value == rlct_closed_form(sig).value

    def test_four_components_two_true(self):
        result = rlct_enumerate(ModelSignature(M=1, H=4, r=2))
        assert result.value.value == 2
        assert result.value.source is RlctSource.ENUMERATED
        assert result.argmin.ghost_sizes == ()
        table = {spec.sizes: fraction for spec, fraction in result.rows}
        assert table[(2, 1, 1)] == Fraction(9, 4)

    def test_regular_has_one_partition(self):
        result = rlct_enumerate(ModelSignature(M=1, H=3, r=3))
        assert len(result.rows) == 1
        assert result.argmin.sizes == (1, 1, 1)

    def test_partitions_are_distinct_and_valid(self):
        sig = ModelSignature(M=1, H=7, r=2)
        seen = set()
        for spec in iter_partitions(sig):
            assert spec.H == sig.H
            assert spec.r_prime <= sig.H
            assert list(spec.ghost_sizes) == sorted(spec.ghost_sizes, reverse=True)
            assert spec.sizes not in seen
            seen.add(spec.sizes)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            rlct_enumerate(ModelSignature(M=1, H=13, r=2))
        with pytest.raises(BudgetExceededError):
            rlct_enumerate(ModelSignature(M=1, H=5, r=2), budget=4)


class TestCombinators:
    def test_sum(self):
        assert combine_sum(value(Fraction(1, 2)), value(Fraction(1, 2))).value == 1
        assert combine_sum(value(Fraction(3, 4)), value(Fraction(7, 4))).value == Fraction(5, 2)

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            combine_sum(value(Fraction(1, 2)), value(Fraction(0)))

    def test_bad_denominator_rejected(self):
        with pytest.raises(DomainError):
            RlctValue(Fraction(1, 3), RlctSource.CLOSED_FORM)

    def test_product(self):
        assert combine_product(value(Fraction(1, 2)), value(Fraction(2))).value == Fraction(1, 2)
        assert combine_product(value(Fraction(3, 4)), value(Fraction(3, 4))).value == Fraction(3, 4)
        assert combine_product(value(Fraction(5, 2)), value(Fraction(1))).source is RlctSource.COMBINATOR

    def test_product_commutative_and_associative(self):
        values = [value(Fraction(k, 4)) for k in (3, 9, 6)]
        results = set()
        for a, b, c in itertools.permutations(values):
            results.add(combine_product(combine_product(a, b), c).value)
            results.add(combine_product(a, combine_product(b, c)).value)
        assert results == {Fraction(3, 4)}


class TestExpansions:
    def test_expected_generalization(self):
        sig = ModelSignature(M=1, H=2, r=1)
        assert expected_generalization(sig, 100, 1.5) == pytest.approx(1.5 + 0.75 / 100)

    def test_invalid_n(self):
        with pytest.raises(DomainError):
            expected_generalization(ModelSignature(M=1, H=1, r=1), 0, 1.0)
