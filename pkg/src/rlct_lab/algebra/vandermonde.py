"""The simplex Vandermonde singularity of a Poisson mixture and its zero set.

H(w) sums the squared differences of the generalized moments ∑_k a_k b_k^x between the model
and the truth over a finite exponent box. Its zero set V is described by the Inv sets: each
true rate vector must be carried by model components whose weights add up to the true weight,
and every other component must have zero weight.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import AmbiguityError, DomainError, GroupAssignmentError
from ..mixture.poisson import Lattice
from ..models import RATE_MATCH_TOL, RATE_MAX, MixtureParams, PartitionSpec, TrueModel, as_rate_vector
from ..utils.seeding import INIT_STREAM, make_rng

logger = logging.getLogger(__name__)

GHOST_RATE_LOW = 0.5
GHOST_RATE_HIGH = RATE_MAX
GHOST_MIN_DISTANCE = 0.1


@dataclass(slots=True, frozen=True, eq=False)
class VandermondeInstance:
    """A model parameter paired with the truth it is compared against."""

    model: MixtureParams
    truth: TrueModel

    def __post_init__(self) -> None:
        if self.model.M != self.truth.M:
            raise DomainError(f"model has M={self.model.M} but truth has M={self.truth.M}")
        if self.model.H < self.truth.r:
            raise DomainError(
                f"H={self.model.H} model components cannot realize r={self.truth.r} true ones"
            )

    @property
    def H(self) -> int:
        return self.model.H

    @property
    def r(self) -> int:
        return self.truth.r

    @property
    def M(self) -> int:
        return self.model.M

    @property
    def box_max(self) -> int:
        """Largest exponent per coordinate: H + r - 1."""

        return self.H + self.r - 1


def exponent_box(top: int, M: int) -> np.ndarray:
    """All multi-indices in [0:top]^M, one per row."""

    if top < 0:
        return np.zeros((0, M), dtype=np.int64)
    return Lattice.box(top, M).points


def moments(weights: np.ndarray, rates: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """∑_k a_k ∏_m b_km^{x_m} for every exponent row x."""

    powers = np.prod(rates[None, :, :] ** exponents[:, None, :], axis=2)
    return powers @ weights


def h_function(inst: VandermondeInstance, box_max: int | None = None) -> float:
    """H(w) over the exponent box [0:box_max]^M (default H + r - 1)."""

    top = inst.box_max if box_max is None else box_max
    exponents = exponent_box(top, inst.M)
    diff = moments(inst.model.weights, inst.model.rates, exponents) - moments(
        inst.truth.weights, inst.truth.rates, exponents
    )
    return float(np.sum(diff**2))


def h_prime_function(inst: VandermondeInstance) -> float:
    """H'(w): H(w) with each component weight scaled by e^{-∑_m b_km}."""

    exponents = exponent_box(inst.box_max, inst.M)
    model_weights = inst.model.weights * np.exp(-inst.model.rates.sum(axis=1))
    truth_weights = inst.truth.weights * np.exp(-inst.truth.rates.sum(axis=1))
    diff = moments(model_weights, inst.model.rates, exponents) - moments(
        truth_weights, inst.truth.rates, exponents
    )
    return float(np.sum(diff**2))


@dataclass(slots=True, frozen=True)
class InvSets:
    """0-based component indices: ``inv[k]`` sit on true rate k, ``inv0`` on no true rate."""

    inv: tuple[frozenset[int], ...]
    inv0: frozenset[int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "inv": [sorted(group) for group in self.inv],
            "inv0": sorted(self.inv0),
        }


def compute_inv_sets(inst: VandermondeInstance, tol: float = RATE_MATCH_TOL) -> InvSets:
    """Match every model rate vector coordinatewise against the true rate vectors."""

    if not tol > 0.0:
        raise DomainError(f"matching tolerance must be > 0, got {tol!r}")

    groups: list[set[int]] = [set() for _ in range(inst.r)]
    unmatched: set[int] = set()
    for k, rate in enumerate(inst.model.rates):
        close = np.all(np.abs(inst.truth.rates - rate[None, :]) <= tol, axis=1)
        matches = np.flatnonzero(close)
        if matches.size > 1:
            raise AmbiguityError(
                f"model component {k} matches true components {matches.tolist()} within {tol}"
            )
        if matches.size == 1:
            groups[int(matches[0])].add(k)
        else:
            unmatched.add(k)
    return InvSets(tuple(frozenset(group) for group in groups), frozenset(unmatched))


@dataclass(slots=True, frozen=True)
class MembershipCertificate:
    """Outcome of the variety test with every violated clause spelled out."""

    member: bool
    inv_sets: InvSets
    violations: tuple[str, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.member

    def to_dict(self) -> dict[str, Any]:
        return {
            "member": self.member,
            "inv_sets": self.inv_sets.to_dict(),
            "violations": list(self.violations),
        }


def variety_membership(inst: VandermondeInstance, tol: float = RATE_MATCH_TOL) -> MembershipCertificate:
    """Decide (a, b) ∈ V: every Inv_i is nonempty and carries a_i^*, Inv_0 has zero weight."""

    inv_sets = compute_inv_sets(inst, tol)
    weights = inst.model.weights
    violations: list[str] = []
    for i, group in enumerate(inv_sets.inv):
        if not group:
            violations.append(f"Inv_{i + 1} is empty")
            continue
        carried = float(sum(weights[j] for j in group))
        target = float(inst.truth.weights[i])
        if abs(carried - target) > tol:
            violations.append(f"weights on Inv_{i + 1} sum to {carried!r}, expected {target!r}")
    for j in sorted(inv_sets.inv0):
        if weights[j] > tol:
            violations.append(f"component {j} is on Inv_0 with weight {float(weights[j])!r}")
    return MembershipCertificate(not violations, inv_sets, tuple(violations))


def draw_ghost_centers(
    spec: PartitionSpec,
    truth: TrueModel,
    rng: np.random.Generator,
    low: float = GHOST_RATE_LOW,
    high: float = GHOST_RATE_HIGH,
    min_distance: float = GHOST_MIN_DISTANCE,
) -> list[np.ndarray]:
    """Uniform centers in [low, high]^M kept min_distance apart from the truth and each other."""

    taken = [np.asarray(rate) for rate in truth.rates]
    centers: list[np.ndarray] = []
    for _ in range(spec.r_prime - spec.r):
        for _attempt in range(10_000):
            candidate = rng.uniform(low, high, size=truth.M)
            if all(np.max(np.abs(candidate - other)) >= min_distance for other in taken):
                break
        else:
            raise DomainError(f"could not place a ghost center in [{low}, {high}]^{truth.M}")
        taken.append(candidate)
        centers.append(candidate)
    return centers


def _check_spec(spec: PartitionSpec, truth: TrueModel, H: int | None = None) -> None:
    if spec.r != truth.r:
        raise GroupAssignmentError(f"partition has r={spec.r} but the truth has r={truth.r}")
    if H is not None and spec.H != H:
        raise GroupAssignmentError(f"partition sizes {spec.sizes} add up to {spec.H}, model has H={H}")


def sample_variety_point(spec: PartitionSpec, truth: TrueModel, seed: int) -> MixtureParams:
    """A point of V laid out group by group in the order of ``spec.sizes``.

    True groups get random positive weights summing to a_j^* at rate b_j^*; ghost groups sit at
    their centers with weight 0.
    """

    _check_spec(spec, truth)
    rng = make_rng(seed, INIT_STREAM)
    if spec.ghost_centers:
        centers = [as_rate_vector(center) for center in spec.ghost_centers]
        taken = [np.asarray(rate) for rate in truth.rates]
        for center in centers:
            if center.size != truth.M:
                raise DomainError(f"ghost center {center.tolist()} does not have dimension {truth.M}")
            close = [other.tolist() for other in taken if np.max(np.abs(center - other)) < GHOST_MIN_DISTANCE]
            if close:
                raise DomainError(
                    f"ghost center {center.tolist()} lies within {GHOST_MIN_DISTANCE} of {close}"
                )
            taken.append(center)
    else:
        centers = draw_ghost_centers(spec, truth, rng)

    weights: list[np.ndarray] = []
    rates: list[np.ndarray] = []
    for j, size in enumerate(spec.true_sizes):
        weights.append(truth.weights[j] * rng.dirichlet(np.ones(size)))
        rates.append(np.repeat(truth.rates[j : j + 1], size, axis=0))
    for center, size in zip(centers, spec.ghost_sizes):
        weights.append(np.zeros(size))
        rates.append(np.repeat(center[None, :], size, axis=0))

    flat = np.concatenate(weights)
    return MixtureParams(flat / flat.sum(), np.vstack(rates))


def group_local_split(inst: VandermondeInstance, spec: PartitionSpec) -> list[float]:
    """Per-group ‖a^{(j)} B^{(j)}‖² with components labeled in the group order of ``spec``."""

    _check_spec(spec, inst.truth, inst.H)
    values: list[float] = []
    for j, part in enumerate(spec.group_slices()):
        weights = inst.model.weights[part]
        rates = inst.model.rates[part]
        size = spec.sizes[j]
        if j < spec.r:
            exponents = exponent_box(size, inst.M)
            diff = moments(weights, rates, exponents) - inst.truth.weights[j] * np.prod(
                inst.truth.rates[j][None, :] ** exponents, axis=1
            )
        else:
            diff = moments(weights, rates, exponent_box(size - 1, inst.M))
        values.append(float(np.sum(diff**2)))
    return values


def local_ideal_form(inst: VandermondeInstance, spec: PartitionSpec) -> list[float]:
    """Sum of squares of the reduced generators of each group.

    True group with several components: (∑a - a*)², the (a_i |b_i - b*|²)² terms and
    (∑ a_i (b_i - b*))² per coordinate. Single component: (a - a*)² + ‖b - b*‖². Ghost group:
    ∑ a_i².
    """

    _check_spec(spec, inst.truth, inst.H)
    values: list[float] = []
    for j, part in enumerate(spec.group_slices()):
        weights = inst.model.weights[part]
        rates = inst.model.rates[part]
        if j >= spec.r:
            values.append(float(np.sum(weights**2)))
            continue
        shift = rates - inst.truth.rates[j][None, :]
        mass = (float(weights.sum()) - float(inst.truth.weights[j])) ** 2
        if spec.sizes[j] == 1:
            values.append(mass + float(np.sum(shift**2)))
            continue
        quadratic = float(np.sum((weights[:, None] * shift**2) ** 2))
        linear = float(np.sum((weights @ shift) ** 2))
        values.append(mass + quadratic + linear)
    return values
