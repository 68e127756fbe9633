"""Property suites over the polynomial identities, the variety, ratio probes and λ values."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .algebra.probes import RatioReport, ratio_bound_probe
from .algebra.rlct import (
    iter_partitions,
    regular_reference,
    rlct_closed_form,
    rlct_enumerate,
)
from .algebra.symmetric import (
    annihilation_check,
    elem_sym_coeffs,
    f_table,
    multi_power_sum_reconstruction,
    power_sum_reconstruction,
)
from .algebra.vandermonde import (
    VandermondeInstance,
    group_local_split,
    h_function,
    h_prime_function,
    local_ideal_form,
    sample_variety_point,
    variety_membership,
)
from .errors import DomainError
from .mixture.poisson import kl_mean_error, random_true_model, sq_surrogate
from .models import MixtureParams, ModelSignature, PartitionSpec, TrueModel
from .utils.seeding import make_rng

logger = logging.getLogger(__name__)

IDENTITY_RTOL = 1e-8
VIETA_RTOL = 1e-9
MEMBER_ZERO = 1e-12
OFF_VARIETY_H = 1e-10
OFF_VARIETY_SURROGATE = 1e-14
OFF_VARIETY_SHIFT = 1e-3
KL_TOL = 1e-10
SPREAD_GROWTH_LIMIT = 10.0
RATIO_CONFIGS: tuple[tuple[int, int, int], ...] = ((1, 3, 1), (1, 3, 2), (2, 2, 1))


@dataclass(slots=True)
class CheckResult:
    name: str
    passed: bool
    details: dict[str, Any] = field(default_factory=dict)
    informational: bool = False

    def to_dict(self) -> dict[str, Any]:
        payload = {"name": self.name, "passed": self.passed, **self.details}
        if self.informational:
            payload["informational"] = True
        return payload


@dataclass(slots=True)
class VerificationReport:
    suite: str
    seed: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if not check.informational)

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
        }


class _Worst:
    """Tracks the largest relative residual seen and how many instances exceeded a tolerance."""

    def __init__(self, tol: float) -> None:
        self.tol = tol
        self.largest = 0.0
        self.failures = 0
        self.count = 0

    def add(self, relative: float) -> None:
        self.count += 1
        self.largest = max(self.largest, relative)
        if not relative <= self.tol:
            self.failures += 1

    def result(self, name: str) -> CheckResult:
        return CheckResult(
            name,
            self.failures == 0,
            {"instances": self.count, "max_relative": self.largest, "tolerance": self.tol},
        )


def polynomial_suite(seed: int, instances: int = 500) -> list[CheckResult]:
    """Annihilation, both reconstruction identities, the Vieta check and the F growth bound."""

    rng = make_rng(seed, 101)
    annihilation, single, multi, vieta = (
        _Worst(IDENTITY_RTOL),
        _Worst(IDENTITY_RTOL),
        _Worst(IDENTITY_RTOL),
        _Worst(VIETA_RTOL),
    )
    bound_failures = 0

    for _ in range(instances):
        H = int(rng.integers(1, 7))
        b = rng.uniform(0.0, 3.0, size=H)
        b = np.where(b == 0.0, 3.0, b)
        a = rng.uniform(-2.0, 2.0, size=H)

        annihilation.add(annihilation_check(a, b, int(rng.integers(H + 1, 21))).relative)
        single.add(power_sum_reconstruction(a, b, int(rng.integers(1, 21))).relative)

        M = int(rng.integers(1, 4))
        rates = rng.uniform(0.0, 3.0, size=(H, M))
        rates = np.where(rates == 0.0, 3.0, rates)
        index = tuple(int(v) for v in rng.integers(1, 21, size=M))
        multi.add(multi_power_sum_reconstruction(a, rates, index).relative)

        sym = elem_sym_coeffs(b)
        for t in rng.uniform(-3.0, 3.0, size=5):
            vieta.add(sym.vieta_residual(float(t)).relative)
        if not f_table(b, 20).bound_holds():
            bound_failures += 1

    return [
        annihilation.result("annihilation"),
        single.result("power_sum_reconstruction"),
        multi.result("multi_power_sum_reconstruction"),
        vieta.result("vieta"),
        CheckResult("f_growth_bound", bound_failures == 0, {"instances": instances, "violations": bound_failures}),
    ]


def random_partition(sig: ModelSignature, rng: np.random.Generator) -> PartitionSpec:
    """A random local pattern: r' drawn in [r, H], leftover components spread over the groups."""

    r_prime = int(rng.integers(sig.r, sig.H + 1))
    sizes = np.ones(r_prime, dtype=int)
    for group in rng.integers(0, r_prime, size=sig.H - r_prime):
        sizes[group] += 1
    true_sizes = tuple(int(s) for s in sizes[: sig.r])
    ghost_sizes = tuple(sorted((int(s) for s in sizes[sig.r :]), reverse=True))
    return PartitionSpec(sig.r, true_sizes + ghost_sizes)


def _shift_off_variety(w: MixtureParams, spec: PartitionSpec) -> MixtureParams:
    group = spec.group_slices()[0]
    heaviest = group.start + int(np.argmax(w.weights[group]))
    rates = np.array(w.rates)
    rates[heaviest, 0] += OFF_VARIETY_SHIFT
    return MixtureParams(w.weights, rates)


def variety_suite(seed: int, points: int = 200) -> list[CheckResult]:
    """Constructed points must be members with vanishing H, surrogate and K; shifted ones not."""

    rng = make_rng(seed, 202)
    disagreements: list[dict[str, Any]] = []
    permutation_failures = 0
    max_member_h = 0.0
    min_off_h = math.inf

    for index in range(points):
        r = int(rng.integers(1, 4))
        M = int(rng.integers(1, 3))
        sig = ModelSignature(M=M, H=int(rng.integers(r, r + 4)), r=r)
        truth = random_true_model(r, M, seed + index, rate_range=(0.5, 3.0))
        spec = random_partition(sig, rng)
        w = sample_variety_point(spec, truth, seed + index)
        on_variety = index % 2 == 0
        if not on_variety:
            w = _shift_off_variety(w, spec)

        inst = VandermondeInstance(w, truth)
        member = variety_membership(inst).member
        h_value = h_function(inst)
        surrogate = sq_surrogate(w, truth, KL_TOL)
        if on_variety:
            kl = kl_mean_error(w, truth, KL_TOL)
            agrees = member and h_value < MEMBER_ZERO and surrogate < MEMBER_ZERO and kl <= KL_TOL
            max_member_h = max(max_member_h, h_value)
        else:
            agrees = (not member) and h_value > OFF_VARIETY_H and surrogate > OFF_VARIETY_SURROGATE
            min_off_h = min(min_off_h, h_value)
        if not agrees:
            disagreements.append(
                {"point": index, "partition": spec.label(), "member": member, "h": h_value, "surrogate": surrogate}
            )

        order = rng.permutation(w.H)
        permuted = VandermondeInstance(w.permuted(order), truth)
        if variety_membership(permuted).member != member or not math.isclose(
            h_function(permuted), h_value, rel_tol=1e-9, abs_tol=1e-18
        ):
            permutation_failures += 1

    return [
        CheckResult(
            "membership_vs_zero_sets",
            not disagreements,
            {
                "points": points,
                "disagreements": disagreements[:10],
                "max_member_h": max_member_h,
                "min_off_variety_h": min_off_h if math.isfinite(min_off_h) else None,
            },
        ),
        CheckResult("permutation_invariance", permutation_failures == 0, {"failures": permutation_failures}),
    ]


def _probe(
    name: str,
    f: Callable[[MixtureParams], float],
    g: Callable[[MixtureParams], float],
    w_star: MixtureParams,
    directions: int,
    seed: int,
    informational: bool = False,
) -> CheckResult:
    report: RatioReport = ratio_bound_probe(f, g, w_star, directions=directions, seed=seed)
    passed = report.bounded(SPREAD_GROWTH_LIMIT)
    return CheckResult(name, passed or informational, report.to_dict(), informational=informational)


def ratio_suite(seed: int, points: int = 5, directions: int = 20) -> list[CheckResult]:
    """Squared-ratio probes of K vs H, H vs the split sum, and two informational pairs."""

    checks: list[CheckResult] = []
    for M, H, r in RATIO_CONFIGS:
        sig = ModelSignature(M=M, H=H, r=r)
        partitions = list(iter_partitions(sig))
        for point in range(points):
            point_seed = seed + 1000 * M + 100 * H + 10 * r + point
            truth = random_true_model(r, M, point_seed, rate_range=(0.5, 3.0))
            spec = partitions[point % len(partitions)]
            w_star = sample_variety_point(spec, truth, point_seed)
            label = f"M={M},H={H},r={r},{spec.label()}#{point}"

            def kl(w: MixtureParams, truth: TrueModel = truth) -> float:
                return kl_mean_error(w, truth, KL_TOL)

            def h(w: MixtureParams, truth: TrueModel = truth) -> float:
                return h_function(VandermondeInstance(w, truth))

            def h_prime(w: MixtureParams, truth: TrueModel = truth) -> float:
                return h_prime_function(VandermondeInstance(w, truth))

            def split(w: MixtureParams, truth: TrueModel = truth, spec: PartitionSpec = spec) -> float:
                return sum(group_local_split(VandermondeInstance(w, truth), spec))

            def local(w: MixtureParams, truth: TrueModel = truth, spec: PartitionSpec = spec) -> float:
                return sum(local_ideal_form(VandermondeInstance(w, truth), spec))

            checks.append(_probe(f"K_vs_H[{label}]", kl, h, w_star, directions, point_seed))
            checks.append(_probe(f"H_vs_split[{label}]", h, split, w_star, directions, point_seed))
            checks.append(_probe(f"H_vs_Hprime[{label}]", h, h_prime, w_star, directions, point_seed, True))
            checks.append(_probe(f"split_vs_local[{label}]", split, local, w_star, directions, point_seed, True))
    return checks


def rlct_suite(seed: int, max_H: int = 8, max_M: int = 3) -> list[CheckResult]:
    """Closed form against the enumeration oracle, the d/2 bound and monotonicity."""

    mismatches: list[dict[str, Any]] = []
    above_regular: list[str] = []
    not_monotone: list[str] = []
    for M in range(1, max_M + 1):
        for H in range(1, max_H + 1):
            for r in range(1, H + 1):
                sig = ModelSignature(M=M, H=H, r=r)
                closed = rlct_closed_form(sig).value
                enumerated = rlct_enumerate(sig).value.value
                if closed != enumerated:
                    mismatches.append({"M": M, "H": H, "r": r, "closed": str(closed), "enumerated": str(enumerated)})
                regular = regular_reference(sig).value
                if closed > regular or (H > r and closed >= regular):
                    above_regular.append(f"M={M},H={H},r={r}")
                if H > r and rlct_closed_form(ModelSignature(M, H - 1, r)).value > closed:
                    not_monotone.append(f"H: M={M},H={H},r={r}")
                if r > 1 and rlct_closed_form(ModelSignature(M, H, r - 1)).value > closed:
                    not_monotone.append(f"r: M={M},H={H},r={r}")
    return [
        CheckResult("closed_form_vs_enumeration", not mismatches, {"mismatches": mismatches}),
        CheckResult("below_regular", not above_regular, {"violations": above_regular}),
        CheckResult("monotone", not not_monotone, {"violations": not_monotone}),
    ]


SUITES: dict[str, Callable[[int], list[CheckResult]]] = {
    "polynomials": polynomial_suite,
    "variety": variety_suite,
    "ratio": ratio_suite,
    "rlct": rlct_suite,
}


def run_suite(name: str, seed: int = 0) -> VerificationReport:
    """Run one suite, or every suite for ``all``."""

    if name != "all" and name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    report = VerificationReport(name, seed)
    for suite_name in SUITES if name == "all" else (name,):
        logger.info("running suite %s (seed %d)", suite_name, seed)
        for check in SUITES[suite_name](seed):
            if not check.passed:
                logger.warning("check %s failed", check.name)
            report.checks.append(check)
    return report
