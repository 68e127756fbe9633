"""Exact learning coefficients: closed form, local values per partition and the enumeration oracle.

All arithmetic is over ``Fraction`` with denominators 1, 2 or 4.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator

from ..errors import BudgetExceededError, DomainError
from ..models import ModelSignature, PartitionSpec, RlctSource, RlctValue

ENUMERATION_BUDGET = 12
HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


def branch(sig: ModelSignature) -> str:
    return "M=1" if sig.M == 1 else "M>1"


def rlct_closed_form(sig: ModelSignature) -> RlctValue:
    """(3r + H - 2)/4 for one-dimensional data, (Mr + H - 1)/2 otherwise."""

    if sig.M == 1:
        value = Fraction(3 * sig.r + sig.H - 2, 4)
    else:
        value = Fraction(sig.M * sig.r + sig.H - 1, 2)
    return RlctValue(value, RlctSource.CLOSED_FORM)


def regular_reference(sig: ModelSignature) -> RlctValue:
    """d/2 with d = H - 1 + HM, the coefficient of a regular model of the same size."""

    return RlctValue(Fraction(sig.d, 2), RlctSource.CLOSED_FORM)


class TermKind(str, enum.Enum):
    SIMPLEX = "simplex"
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3 = "type3"


@dataclass(slots=True, frozen=True)
class LocalTerm:
    """Contribution of one group (or of the simplex constraint) to a local λ."""

    group: int | None
    kind: TermKind
    value: Fraction

    def to_dict(self) -> dict[str, Any]:
        return {
            "group": self.group,
            "kind": self.kind.value,
            "value": str(self.value),
        }


def local_lambda_terms(spec: PartitionSpec, M: int) -> list[LocalTerm]:
    """Break the local λ of ``spec`` into per-group pieces; groups are numbered from 1."""

    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    terms = [LocalTerm(None, TermKind.SIMPLEX, -HALF)]
    for j, size in enumerate(spec.sizes, start=1):
        if j > spec.r:
            terms.append(LocalTerm(j, TermKind.TYPE3, Fraction(size, 2)))
        elif M > 1:
            kind = TermKind.TYPE2 if size == 1 else TermKind.TYPE1
            terms.append(LocalTerm(j, kind, Fraction(M + size, 2)))
        elif size == 1:
            terms.append(LocalTerm(j, TermKind.TYPE2, Fraction(1)))
        else:
            terms.append(LocalTerm(j, TermKind.TYPE1, 1 + Fraction(size - 1, 4)))
    return terms


def local_lambda(spec: PartitionSpec, M: int) -> RlctValue:
    """λ of the neighborhood described by ``spec``.

    M = 1: r - 1/2 + (∑_{j<=r} H_j - r)/4 + ∑_{j>r} H_j/2. M > 1: (Mr + H - 1)/2.
    """

    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    if M == 1:
        value = (
            spec.r
            - HALF
            + QUARTER * (sum(spec.true_sizes) - spec.r)
            + HALF * sum(spec.ghost_sizes)
        )
    else:
        value = Fraction(M * spec.r + spec.H - 1, 2)
    return RlctValue(value, RlctSource.LOCAL)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of ``parts`` positive integers adding up to ``total``."""

    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def _partitions(total: int, parts: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    """Nonincreasing tuples of ``parts`` positive integers adding up to ``total``."""

    if parts == 0:
        if total == 0:
            yield ()
        return
    top = total - parts + 1 if largest is None else min(largest, total - parts + 1)
    for first in range(top, 0, -1):
        for rest in _partitions(total - first, parts - 1, first):
            yield (first, *rest)


def iter_partitions(sig: ModelSignature) -> Iterator[PartitionSpec]:
    """Every local pattern: ordered true groups of size >= 1, unordered ghost groups, r' <= H."""

    for r_prime in range(sig.r, sig.H + 1):
        ghosts = r_prime - sig.r
        for true_total in range(sig.r, sig.H - ghosts + 1):
            for true_sizes in _compositions(true_total, sig.r):
                for ghost_sizes in _partitions(sig.H - true_total, ghosts):
                    yield PartitionSpec(sig.r, true_sizes + ghost_sizes)


@dataclass(slots=True, frozen=True)
class EnumerationResult:
    """Minimum of the local λ over every partition, with the full table of rows."""

    value: RlctValue
    argmin: PartitionSpec
    rows: tuple[tuple[PartitionSpec, Fraction], ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.value.to_dict(),
            "argmin": self.argmin.label(),
            "partitions": len(self.rows),
        }


def rlct_enumerate(sig: ModelSignature, budget: int = ENUMERATION_BUDGET) -> EnumerationResult:
    """Minimize local_lambda over all partitions of H components."""

    if sig.H > budget:
        raise BudgetExceededError(f"enumeration is limited to H <= {budget}, got H={sig.H}")

    rows = tuple((spec, local_lambda(spec, sig.M).value) for spec in iter_partitions(sig))
    best_spec, best_value = min(rows, key=lambda row: row[1])
    return EnumerationResult(RlctValue(best_value, RlctSource.ENUMERATED), best_spec, rows)


def combine_sum(l1: RlctValue, l2: RlctValue) -> RlctValue:
    """λ of a function of disjoint parameter blocks added together."""

    return RlctValue(l1.value + l2.value, RlctSource.COMBINATOR)


def combine_product(l1: RlctValue, l2: RlctValue) -> RlctValue:
    """λ of a product of functions: the smaller of the two."""

    return RlctValue(min(l1.value, l2.value), RlctSource.COMBINATOR)


def expected_generalization(sig: ModelSignature, n: int, l0: float) -> float:
    """Leading-order E[G_n] = L(w0) + λ/n."""

    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return l0 + float(rlct_closed_form(sig).value) / n
