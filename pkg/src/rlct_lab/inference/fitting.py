"""Weighted least-squares fit of the 1/n slope of the centered generalization error."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np

from ..errors import ConfigError, InsufficientDataError
from ..models import ExperimentRecord

logger = logging.getLogger(__name__)

MIN_SAMPLE_SIZES = 3
MIN_REPLICATIONS = 2
EXACT_RTOL = 1e-12


@dataclass(slots=True, frozen=True)
class SampleSizeSummary:
    """Replication statistics of ΔG_n = G_n - L(w0) at one n, and the fit residual there."""

    n: int
    replications: int
    mean_delta: float
    variance: float
    residual: float

    @property
    def inverse_n(self) -> float:
        return 1.0 / self.n

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.variance / self.replications)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "replications": self.replications,
            "inverse_n": self.inverse_n,
            "mean_delta": self.mean_delta,
            "se_delta": self.standard_error,
            "residual": self.residual,
        }


@dataclass(slots=True, frozen=True)
class LambdaFit:
    """λ̂ with its standard error and the per-n summaries it was fitted on."""

    lambda_hat: float
    se: float
    points: tuple[SampleSizeSummary, ...] = field(default_factory=tuple)
    n_min: int | None = None

    def z_score(self, lambda_theory: float) -> float:
        diff = self.lambda_hat - lambda_theory
        if self.se > 0.0:
            return diff / self.se
        if diff == 0.0 or abs(diff) <= EXACT_RTOL * max(abs(lambda_theory), 1.0):
            return 0.0
        return math.copysign(math.inf, diff)

    def to_dict(self, lambda_theory: float | None = None) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "lambda_hat": self.lambda_hat,
            "se": self.se,
            "n_min": self.n_min,
            "points": [point.to_dict() for point in self.points],
        }
        if lambda_theory is not None:
            z = self.z_score(lambda_theory)
            payload["lambda_theory"] = lambda_theory
            payload["z_score"] = z if math.isfinite(z) else None
        return payload

    def plot_csv(self, theory: Callable[[int], float] | None = None) -> str:
        """Two columns (1/n, mean ΔG_n) plus the fitted line, one row per n.

        ``theory`` maps n to the expected ΔG_n and adds it as a fourth column.
        """

        header = "inverse_n,mean_delta,fitted"
        lines = [header + (",theory" if theory is not None else "")]
        for point in self.points:
            fitted = self.lambda_hat * point.inverse_n
            row = f"{point.inverse_n!r},{point.mean_delta!r},{fitted!r}"
            if theory is not None:
                row += f",{float(theory(point.n))!r}"
            lines.append(row)
        return "\n".join(lines) + "\n"


def _group(records: Iterable[ExperimentRecord], n_min: int | None) -> dict[int, list[float]]:
    grouped: dict[int, list[float]] = defaultdict(list)
    hashes: set[str] = set()
    for record in records:
        hashes.add(record.config_hash)
        if n_min is not None and record.n < n_min:
            continue
        grouped[record.n].append(record.delta)
    if len(hashes) > 1:
        raise ConfigError(f"records come from several configurations: {sorted(hashes)}")
    return dict(sorted(grouped.items()))


def fit_lambda(records: Iterable[ExperimentRecord], n_min: int | None = None) -> LambdaFit:
    """Fit mean(G_n - L(w0)) = λ/n through the origin, weighting each n by reps/variance.

    When every n has zero replication variance the data must lie exactly on a line through
    the origin; the slope is then returned with SE 0. Otherwise zero variances are raised to
    the smallest positive one.
    """

    grouped = _group(records, n_min)
    if len(grouped) < MIN_SAMPLE_SIZES:
        raise InsufficientDataError(
            f"need at least {MIN_SAMPLE_SIZES} distinct sample sizes, got {sorted(grouped)}"
        )
    short = [n for n, deltas in grouped.items() if len(deltas) < MIN_REPLICATIONS]
    if short:
        raise InsufficientDataError(f"need {MIN_REPLICATIONS} replications at every n, short at {short}")

    ns = np.array(list(grouped), dtype=float)
    reps = np.array([len(deltas) for deltas in grouped.values()], dtype=float)
    means = np.array([np.mean(deltas) for deltas in grouped.values()])
    variances = np.array([np.var(deltas, ddof=1) for deltas in grouped.values()])
    x = 1.0 / ns

    if np.all(variances == 0.0):
        slope = float(np.dot(x, means) / np.dot(x, x))
        if not np.allclose(means, slope * x, rtol=EXACT_RTOL, atol=0.0):
            raise InsufficientDataError(
                "replications have zero variance but the means do not lie on a line through the origin"
            )
        se = 0.0
    else:
        if np.any(variances == 0.0):
            floor = float(variances[variances > 0.0].min())
            logger.warning("zero replication variance at n=%s; using %g", ns[variances == 0.0].astype(int).tolist(), floor)
            variances = np.where(variances > 0.0, variances, floor)
        weights = reps / variances
        information = float(np.sum(weights * x * x))
        slope = float(np.sum(weights * x * means) / information)
        se = 1.0 / math.sqrt(information)

    points = tuple(
        SampleSizeSummary(
            n=int(n),
            replications=int(count),
            mean_delta=float(mean),
            variance=float(var),
            residual=float(mean - slope * inv),
        )
        for n, count, mean, var, inv in zip(ns, reps, means, variances, x)
    )
    for point in points:
        logger.debug("n=%d mean ΔG=%.6g residual=%.3g", point.n, point.mean_delta, point.residual)
    return LambdaFit(lambda_hat=slope, se=se, points=points, n_min=n_min)
