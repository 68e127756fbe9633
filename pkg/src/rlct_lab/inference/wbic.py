"""λ estimated from a single tempered posterior at inverse temperature 1/log n.

With β = 1/log n the tempered mean of n L_n(w) approximates n L_n(w0) + λ log n, so

    λ̂ = (E_w^β[n L_n(w)] - n L_n(w_ref)) / log n

where n L_n is the negative log likelihood of the data. The reference w_ref is either the
best tempered draw or the realizing parameter of the truth.
"""

from __future__ import annotations

import enum
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from ..config import PriorSpec, SamplerSettings
from ..errors import DomainError
from ..mixture.poisson import mixture_log_pmf_many, realizing_parameter
from ..models import ExperimentRecord, ModelSignature, TrueModel
from ..utils.seeding import TEMPERED_STREAM
from .sampler import posterior_mcmc

logger = logging.getLogger(__name__)

MIN_WBIC_N = 30


class WbicReference(str, enum.Enum):
    BEST_DRAW = "best_draw"
    TRUTH = "truth"


@dataclass(slots=True, frozen=True)
class WbicEstimate:
    lambda_hat: float
    beta: float
    mean_nll: float
    reference_nll: float
    reference: WbicReference
    accept_w: float | None
    accept_b: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "wbic_lambda": self.lambda_hat,
            "beta": self.beta,
            "mean_nll": self.mean_nll,
            "reference_nll": self.reference_nll,
            "reference": self.reference.value,
        }


def wbic_lambda(
    data: np.ndarray,
    sig: ModelSignature,
    prior: PriorSpec,
    settings: SamplerSettings,
    truth: TrueModel | None = None,
    reference: WbicReference | str = WbicReference.BEST_DRAW,
) -> WbicEstimate:
    """Run the tempered chain and turn its mean negative log likelihood into λ̂."""

    counts = np.asarray(data)
    if counts.ndim == 1:
        counts = counts.reshape(-1, 1)
    n = int(counts.shape[0])
    if n < MIN_WBIC_N:
        raise DomainError(f"WBIC needs n >= {MIN_WBIC_N}, got n={n}")
    reference = WbicReference(reference)
    if reference is WbicReference.TRUTH and truth is None:
        raise DomainError("the truth reference needs the true model")

    log_n = math.log(n)
    beta = 1.0 / log_n
    samples = posterior_mcmc(counts, sig, prior, settings, beta=beta, stream=TEMPERED_STREAM)
    nll = -samples.log_likelihood
    mean_nll = float(np.mean(nll))

    if reference is WbicReference.BEST_DRAW:
        reference_nll = float(np.min(nll))
    else:
        w0 = realizing_parameter(truth, sig.H)
        reference_nll = float(-np.sum(mixture_log_pmf_many(counts, w0)))

    estimate = WbicEstimate(
        lambda_hat=(mean_nll - reference_nll) / log_n,
        beta=beta,
        mean_nll=mean_nll,
        reference_nll=reference_nll,
        reference=reference,
        accept_w=samples.accept_w,
        accept_b=samples.accept_b,
    )
    logger.debug("WBIC n=%d beta=%.4f lambda_hat=%.4f (%s)", n, beta, estimate.lambda_hat, reference.value)
    return estimate


@dataclass(slots=True, frozen=True)
class WbicSummary:
    """Spread of the per-replication WBIC λ̂ at one sample size."""

    n: int
    replications: int
    mean: float
    sd: float

    @property
    def se(self) -> float:
        return self.sd / math.sqrt(self.replications)

    def to_dict(self, lambda_theory: float | None = None) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "n": self.n,
            "replications": self.replications,
            "mean": self.mean,
            "sd": self.sd,
            "se": self.se,
        }
        if lambda_theory is not None:
            payload["deviation"] = self.mean - lambda_theory
        return payload


def summarize_wbic(records: Iterable[ExperimentRecord]) -> list[WbicSummary]:
    """Per-n mean and sample deviation of the WBIC column; sizes with fewer than two values are left out."""

    grouped: dict[int, list[float]] = defaultdict(list)
    for record in records:
        if record.wbic_lambda is not None:
            grouped[record.n].append(record.wbic_lambda)
    summaries = []
    for n in sorted(grouped):
        values = np.asarray(grouped[n])
        if values.size < 2:
            continue
        summaries.append(WbicSummary(n, int(values.size), float(values.mean()), float(values.std(ddof=1))))
    return summaries
