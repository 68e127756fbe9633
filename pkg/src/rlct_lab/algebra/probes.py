"""Numerical probes of squared-ratio bounds between functions vanishing at a point."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from ..errors import DomainError
from ..models import MixtureParams
from ..utils.seeding import make_rng

logger = logging.getLogger(__name__)

DEFAULT_SCALES: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
UNDERFLOW = 1e-300
ZERO_ATOL = 1e-12
DOMAIN_MARGIN = 0.5

ParamFunction = Callable[[MixtureParams], float]


@dataclass(slots=True)
class ScaleRatio:
    """Extremes of g²/f² over all probe directions at one perturbation size."""

    scale: float
    low: float = math.inf
    high: float = -math.inf
    evaluated: int = 0
    skipped: int = 0

    def add(self, ratio: float) -> None:
        self.low = min(self.low, ratio)
        self.high = max(self.high, ratio)
        self.evaluated += 1

    @property
    def spread(self) -> float:
        if self.evaluated == 0 or self.low <= 0.0:
            return math.inf
        return self.high / self.low

    def to_dict(self) -> dict[str, Any]:
        return {
            "scale": self.scale,
            "min": self.low if self.evaluated else None,
            "max": self.high if self.evaluated else None,
            "spread": self.spread if math.isfinite(self.spread) else None,
            "evaluated": self.evaluated,
            "skipped": self.skipped,
        }


@dataclass(slots=True)
class RatioReport:
    """Per-scale ratio intervals, ordered from the largest scale to the smallest."""

    per_scale: list[ScaleRatio] = field(default_factory=list)

    @property
    def low(self) -> float:
        return min((s.low for s in self.per_scale if s.evaluated), default=math.inf)

    @property
    def high(self) -> float:
        return max((s.high for s in self.per_scale if s.evaluated), default=-math.inf)

    @property
    def spread_growth(self) -> float:
        """Spread at the smallest scale divided by the spread at the largest one."""

        if not self.per_scale:
            return math.inf
        first, last = self.per_scale[0].spread, self.per_scale[-1].spread
        if not (math.isfinite(first) and math.isfinite(last)):
            return math.inf
        return last / first

    def bounded(self, max_growth: float = 10.0) -> bool:
        finite = all(math.isfinite(s.spread) for s in self.per_scale)
        return finite and self.spread_growth < max_growth

    def to_dict(self) -> dict[str, Any]:
        growth = self.spread_growth
        return {
            "scales": [s.to_dict() for s in self.per_scale],
            "min": self.low if math.isfinite(self.low) else None,
            "max": self.high if math.isfinite(self.high) else None,
            "spread_growth": growth if math.isfinite(growth) else None,
        }


def random_direction(center: MixtureParams, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A unit direction in (a, b) that keeps the weights on the simplex near ``center``.

    Zero-weight components only move inward; the total weight change is taken off the
    positive components so the weights still sum to one.
    """

    delta = rng.standard_normal(center.H + center.H * center.M)
    delta /= np.linalg.norm(delta)
    d_weights = delta[: center.H].copy()
    d_rates = delta[center.H :].reshape(center.H, center.M)

    zero = center.weights <= 0.0
    d_weights[zero] = np.abs(d_weights[zero])
    positive = ~zero
    d_weights[positive] -= d_weights.sum() / positive.sum()

    norm = math.sqrt(float(np.sum(d_weights**2) + np.sum(d_rates**2)))
    return d_weights / norm, d_rates / norm


def fit_to_domain(
    center: MixtureParams, d_weights: np.ndarray, d_rates: np.ndarray, largest: float
) -> tuple[np.ndarray, np.ndarray]:
    """Shorten a direction so the step at scale ``largest`` stays inside W.

    The step is capped at half the distance to the nearest boundary (a weight reaching 0 or a
    rate reaching 0) along the ray, so every scale of the sweep lands on a valid parameter.
    """

    reach = math.inf
    falling_weights = d_weights < 0.0
    if np.any(falling_weights):
        reach = min(reach, float(np.min(center.weights[falling_weights] / -d_weights[falling_weights])))
    falling_rates = d_rates < 0.0
    if np.any(falling_rates):
        reach = min(reach, float(np.min(center.rates[falling_rates] / -d_rates[falling_rates])))
    cap = DOMAIN_MARGIN * reach
    if largest <= cap:
        return d_weights, d_rates
    factor = cap / largest
    return d_weights * factor, d_rates * factor


def _shift(center: MixtureParams, d_weights: np.ndarray, d_rates: np.ndarray, eps: float) -> MixtureParams | None:
    weights = center.weights + eps * d_weights
    rates = center.rates + eps * d_rates
    if np.any(weights < 0.0) or np.any(rates <= 0.0):
        return None
    return MixtureParams(weights / weights.sum(), rates)


def ratio_bound_probe(
    f: ParamFunction,
    g: ParamFunction,
    w_star: MixtureParams,
    directions: int = 20,
    scales: Sequence[float] = DEFAULT_SCALES,
    seed: int = 0,
) -> RatioReport:
    """Evaluate g(w* + εδ)² / f(w* + εδ)² along random directions δ for each ε in ``scales``.

    Each direction is shortened along its ray until the largest step stays inside W, so every
    direction is evaluated at every scale. Points where both values underflow are skipped.
    """

    if directions < 1:
        raise DomainError(f"need at least one direction, got {directions}")
    ordered = sorted((float(s) for s in scales), reverse=True)
    if not ordered or ordered[-1] <= 0.0:
        raise DomainError(f"scales must be positive, got {list(scales)}")
    at_center = (f(w_star), g(w_star))
    if any(abs(value) > ZERO_ATOL for value in at_center):
        raise DomainError(f"both functions must vanish at w*, got f={at_center[0]!r}, g={at_center[1]!r}")

    report = RatioReport([ScaleRatio(scale) for scale in ordered])
    for index in range(directions):
        d_weights, d_rates = random_direction(w_star, make_rng(seed, index))
        d_weights, d_rates = fit_to_domain(w_star, d_weights, d_rates, ordered[0])
        for bucket in report.per_scale:
            point = _shift(w_star, d_weights, d_rates, bucket.scale)
            if point is None:
                bucket.skipped += 1
                continue
            f_value, g_value = f(point), g(point)
            if abs(f_value) < UNDERFLOW and abs(g_value) < UNDERFLOW:
                bucket.skipped += 1
                continue
            if f_value == 0.0:
                logger.warning("f vanished off w* at scale %g (direction %d)", bucket.scale, index)
                bucket.add(math.inf)
                continue
            bucket.add((g_value / f_value) ** 2)

    for bucket in report.per_scale:
        if bucket.skipped:
            logger.debug("scale %g: skipped %d probe points", bucket.scale, bucket.skipped)
    return report
