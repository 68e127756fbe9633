"""Configuration models: runtime settings, priors, sampler settings and experiment configs."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from dotenv import load_dotenv
from scipy import stats

from .errors import ConfigError, DomainError
from .models import RATE_MAX, MixtureParams, ModelSignature, TrueModel

WBIC_REFERENCES = frozenset({"best_draw", "truth"})
WORKER_KINDS = frozenset({"process", "thread"})


@dataclass(slots=True)
class Settings:
    """Runtime configuration for the command line and the experiment pipeline.

    ``workers`` picks the executor grid cells run on: separate processes, or threads of the
    calling process.
    """

    max_concurrency: int = 4
    log_level: str = "INFO"
    output_dir: Path = Path("artifacts")
    truncation_tol: float = 1e-10
    workers: str = "process"

    def __post_init__(self) -> None:
        if self.workers not in WORKER_KINDS:
            raise ConfigError(f"workers must be one of {sorted(WORKER_KINDS)}, got {self.workers!r}")

    @classmethod
    def from_env(cls) -> "Settings":
        """Create settings from the environment, loading a ``.env`` file when present."""

        load_dotenv()
        try:
            max_concurrency = int(os.getenv("RLCT_LAB_THREADS", "4"))
            truncation_tol = float(os.getenv("RLCT_LAB_TOL", "1e-10"))
        except ValueError as exc:
            raise ConfigError(f"invalid numeric environment setting: {exc}") from exc

        return cls(
            max_concurrency=max(1, max_concurrency),
            log_level=os.getenv("RLCT_LAB_LOG_LEVEL", "INFO").upper(),
            output_dir=Path(os.getenv("RLCT_LAB_OUTPUT_DIR", "artifacts")),
            truncation_tol=truncation_tol,
            workers=os.getenv("RLCT_LAB_WORKERS", "process").lower(),
        )


@dataclass(slots=True, frozen=True)
class PriorSpec:
    """Dirichlet(α) on the weights times Gamma(κ, θ) on each rate, truncated to [b_lo, b_hi].

    θ is a rate parameter, so the untruncated rate prior has mean κ/θ.
    """

    alpha: float = 1.0
    kappa: float = 2.0
    theta: float = 1.0
    b_lo: float = 0.05
    b_hi: float = RATE_MAX

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.kappa <= 0 or self.theta <= 0:
            raise ConfigError("prior parameters alpha, kappa, theta must be > 0")
        if not (0.0 < self.b_lo < self.b_hi < float("inf")):
            raise ConfigError(f"rate support must satisfy 0 < b_lo < b_hi < inf, got {self.b_lo}, {self.b_hi}")

    def in_support(self, rates: np.ndarray) -> bool:
        return bool(np.all(rates >= self.b_lo) and np.all(rates <= self.b_hi))

    def log_density(self, weights: np.ndarray, rates: np.ndarray) -> float:
        """Unnormalized log prior; -inf outside the support box."""

        if not self.in_support(rates) or np.any(weights < 0.0):
            return float("-inf")
        log_w = float(np.sum((self.alpha - 1.0) * np.log(weights))) if self.alpha != 1.0 else 0.0
        log_b = float(np.sum((self.kappa - 1.0) * np.log(rates) - self.theta * rates))
        return log_w + log_b

    def sample_rates(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
        """Exact draws from Gamma(κ, θ) truncated to [b_lo, b_hi], by inverting the CDF."""

        law = stats.gamma(self.kappa, scale=1.0 / self.theta)
        low, high = law.cdf(self.b_lo), law.cdf(self.b_hi)
        rates = law.ppf(rng.uniform(low, high, size=size))
        return np.clip(rates, self.b_lo, self.b_hi)

    def sample(self, rng: np.random.Generator, H: int, M: int) -> MixtureParams:
        """Draw a parameter from the prior."""

        weights = rng.dirichlet(np.full(H, self.alpha))
        weights = weights / weights.sum()
        return MixtureParams(weights, self.sample_rates(rng, (H, M)))


@dataclass(slots=True, frozen=True)
class SamplerSettings:
    """Metropolis-within-Gibbs settings.

    ``prior_redraws`` adds, every iteration, an independence move per block that proposes a fresh
    draw from the prior; it lets near-empty components jump across the rate range.
    """

    chains: int = 2
    iterations: int = 3000
    burn_in: int = 1000
    thinning: int = 2
    weight_scale: float = 0.5
    rate_scale: float = 0.2
    seed: int = 0
    adapt_window: int = 50
    prior_redraws: bool = True

    def __post_init__(self) -> None:
        if min(self.chains, self.iterations, self.thinning, self.adapt_window) < 1:
            raise ConfigError("chains, iterations, thinning and adapt_window must be >= 1")
        if not (0 <= self.burn_in < self.iterations):
            raise ConfigError(f"burn_in must lie in [0, iterations), got {self.burn_in}")
        if self.weight_scale <= 0 or self.rate_scale <= 0:
            raise ConfigError("proposal scales must be > 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")

    @property
    def draws_per_chain(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thinning))


def _truth_from_payload(payload: Mapping[str, Any]) -> TrueModel:
    try:
        return TrueModel(MixtureParams.from_dict(payload))
    except DomainError as exc:
        raise ConfigError(f"invalid truth: {exc}") from exc


@dataclass(slots=True, frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment grid; the output is a pure function of it."""

    sig: ModelSignature
    truth: TrueModel
    n_grid: tuple[int, ...]
    replications: int
    prior: PriorSpec = field(default_factory=PriorSpec)
    sampler: SamplerSettings = field(default_factory=SamplerSettings)
    truncation_tol: float = 1e-10
    output_path: Path = Path("artifacts/experiment.csv")
    wbic: bool = False
    wbic_reference: str = "best_draw"

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "output_path", Path(self.output_path))
        if self.truth.r != self.sig.r or self.truth.M != self.sig.M:
            raise ConfigError(
                f"truth has r={self.truth.r}, M={self.truth.M} but signature says "
                f"r={self.sig.r}, M={self.sig.M}"
            )
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise ConfigError("n_grid must contain positive sample sizes")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError(f"n_grid must be strictly increasing, got {list(self.n_grid)}")
        if self.replications < 2:
            raise ConfigError("replications must be >= 2")
        if not (0.0 < self.truncation_tol <= 1e-6):
            raise ConfigError("truncation_tol must lie in (0, 1e-6]")
        if self.wbic and min(self.n_grid) < 30:
            raise ConfigError("WBIC estimation needs every n >= 30")
        if self.wbic_reference not in WBIC_REFERENCES:
            raise ConfigError(f"wbic_reference must be one of {sorted(WBIC_REFERENCES)}, got {self.wbic_reference!r}")

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "ExperimentConfig":
        try:
            truth = _truth_from_payload(payload["truth"])
            stated_r = payload.get("r", truth.r)
            if int(stated_r) != truth.r:
                raise ConfigError(f"r={stated_r} disagrees with the {truth.r}-component truth")
            sig = ModelSignature(M=int(payload["M"]), H=int(payload["H"]), r=truth.r)
            return cls(
                sig=sig,
                truth=truth,
                n_grid=tuple(payload["n_grid"]),
                replications=int(payload["replications"]),
                prior=PriorSpec(**payload.get("prior", {})),
                sampler=SamplerSettings(**payload.get("sampler", {})),
                truncation_tol=float(payload.get("truncation_tol", 1e-10)),
                output_path=Path(payload["output_path"]),
                wbic=bool(payload.get("wbic", False)),
                wbic_reference=str(payload.get("wbic_reference", "best_draw")),
            )
        except ConfigError:
            raise
        except KeyError as exc:
            raise ConfigError(f"config is missing field {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def from_json(cls, path: Path) -> "ExperimentConfig":
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        return cls.from_dict(payload)

    def to_dict(self) -> dict[str, Any]:
        return {
            "M": self.sig.M,
            "H": self.sig.H,
            "r": self.sig.r,
            "truth": self.truth.params.to_dict(),
            "n_grid": list(self.n_grid),
            "replications": self.replications,
            "prior": asdict(self.prior),
            "sampler": asdict(self.sampler),
            "truncation_tol": self.truncation_tol,
            "output_path": str(self.output_path),
            "wbic": self.wbic,
            "wbic_reference": self.wbic_reference,
        }

    @property
    def config_hash(self) -> str:
        """Short digest of every field except the output path."""

        payload = self.to_dict()
        payload.pop("output_path")
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]
