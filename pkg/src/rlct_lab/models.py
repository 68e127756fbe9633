"""Core datamodels for mixtures, partitions, learning coefficients and experiment records."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DomainError

WEIGHT_SUM_ATOL = 1e-12
RATE_MATCH_TOL = 1e-9
# True rate vectors must stay this far apart (max-norm) so Inv-set matching is unambiguous.
RATE_SEPARATION = 100 * RATE_MATCH_TOL
# Upper end of the rate range: prior support and ghost centers stay below it.
RATE_MAX = 30.0


def as_rate_vector(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Validate a rate vector: M >= 1 finite, strictly positive Poisson intensities."""

    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("a rate vector needs at least one coordinate")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"rates must be finite and > 0, got {arr.tolist()}")
    return arr


def as_count(values: Sequence[int] | np.ndarray | int, M: int | None = None) -> np.ndarray:
    """Validate one observation x: M nonnegative integers."""

    arr = np.atleast_1d(np.asarray(values))
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("a count needs at least one coordinate")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise DomainError(f"counts must be integers, got {arr.tolist()}")
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise DomainError(f"counts must be >= 0, got {arr.tolist()}")
    if M is not None and arr.size != M:
        raise DomainError(f"expected a count of dimension {M}, got {arr.size}")
    return arr


@dataclass(slots=True, frozen=True, eq=False)
class MixtureParams:
    """Parameter w = (a, b) of an H-component, M-dimensional Poisson mixture."""

    weights: np.ndarray
    rates: np.ndarray

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float).reshape(-1)
        rates = np.array(self.rates, dtype=float)
        if weights.size == 0:
            raise DomainError("a mixture needs at least one component")
        if rates.ndim == 1:
            rates = rates.reshape(-1, 1) if rates.size == weights.size else rates.reshape(1, -1)
        if rates.ndim != 2 or rates.shape[0] != weights.size or rates.shape[1] == 0:
            raise DomainError(
                f"rates must have shape (H, M) with H={weights.size}, got {rates.shape}"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
            raise DomainError(f"weights must be finite and >= 0, got {weights.tolist()}")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_ATOL:
            raise DomainError(f"weights must sum to 1, got {weights.sum()!r}")
        if not np.all(np.isfinite(rates)) or np.any(rates <= 0.0):
            raise DomainError("rates must be finite and > 0")

        weights.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "rates", rates)

    @property
    def H(self) -> int:
        return int(self.weights.size)

    @property
    def M(self) -> int:
        return int(self.rates.shape[1])

    def permuted(self, order: Sequence[int]) -> "MixtureParams":
        """Relabel components; ``order[k]`` is the old index placed at position k."""

        index = np.asarray(order, dtype=int)
        if sorted(index.tolist()) != list(range(self.H)):
            raise DomainError(f"not a permutation of {self.H} components: {list(order)}")
        return MixtureParams(self.weights[index], self.rates[index])

    def to_dict(self) -> dict[str, Any]:
        return {"weights": self.weights.tolist(), "rates": self.rates.tolist()}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "MixtureParams":
        try:
            return cls(payload["weights"], payload["rates"])
        except KeyError as exc:
            raise ConfigError(f"mixture is missing field {exc.args[0]!r}") from exc


@dataclass(slots=True, frozen=True, eq=False)
class TrueModel:
    """The data-generating mixture q(x): r components, positive weights, distinct rates."""

    params: MixtureParams

    def __post_init__(self) -> None:
        if np.any(self.params.weights <= 0.0):
            raise DomainError("true weights must be strictly positive")
        rates = self.params.rates
        for i in range(rates.shape[0]):
            for j in range(i + 1, rates.shape[0]):
                if np.max(np.abs(rates[i] - rates[j])) <= RATE_SEPARATION:
                    raise DomainError(
                        f"true rate vectors {i} and {j} are not distinct: "
                        f"{rates[i].tolist()} vs {rates[j].tolist()}"
                    )

    @classmethod
    def from_lists(
        cls, weights: Sequence[float], rates: Sequence[Sequence[float]] | Sequence[float]
    ) -> "TrueModel":
        return cls(MixtureParams(weights, rates))

    @property
    def r(self) -> int:
        return self.params.H

    @property
    def M(self) -> int:
        return self.params.M

    @property
    def weights(self) -> np.ndarray:
        return self.params.weights

    @property
    def rates(self) -> np.ndarray:
        return self.params.rates


@dataclass(slots=True, frozen=True)
class PartitionSpec:
    """Local collapse pattern {r, r', H_1..H_r'} around a point of the variety.

    Groups 1..r sit on the true rate vectors, groups r+1..r' on ghost centers with zero
    weight. Ghost centers are optional; when absent they are drawn on demand.
    """

    r: int
    sizes: tuple[int, ...]
    ghost_centers: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self) -> None:
        sizes = tuple(int(size) for size in self.sizes)
        centers = tuple(tuple(float(c) for c in center) for center in self.ghost_centers)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "ghost_centers", centers)

        if self.r < 1:
            raise DomainError(f"a partition needs r >= 1, got {self.r}")
        if len(sizes) < self.r:
            raise DomainError(f"r'={len(sizes)} groups cannot cover r={self.r} true components")
        if any(size < 1 for size in sizes):
            raise DomainError(f"every group needs at least one component, got {sizes}")
        if centers:
            if len(centers) != len(sizes) - self.r:
                raise DomainError(
                    f"expected {len(sizes) - self.r} ghost centers, got {len(centers)}"
                )
            for center in centers:
                as_rate_vector(center)

    @property
    def r_prime(self) -> int:
        return len(self.sizes)

    @property
    def H(self) -> int:
        return sum(self.sizes)

    @property
    def true_sizes(self) -> tuple[int, ...]:
        return self.sizes[: self.r]

    @property
    def ghost_sizes(self) -> tuple[int, ...]:
        return self.sizes[self.r :]

    def group_slices(self) -> list[slice]:
        """Component index ranges of each group, in group order."""

        slices: list[slice] = []
        start = 0
        for size in self.sizes:
            slices.append(slice(start, start + size))
            start += size
        return slices

    def label(self) -> str:
        true_part = ",".join(str(size) for size in self.true_sizes)
        ghost_part = ",".join(str(size) for size in self.ghost_sizes)
        return f"({true_part}|{ghost_part})"


@dataclass(slots=True, frozen=True)
class ModelSignature:
    """(M, H, r): data dimension, model components, true components."""

    M: int
    H: int
    r: int

    def __post_init__(self) -> None:
        if self.M < 1 or self.H < 1 or self.r < 1:
            raise DomainError(f"M, H, r must all be >= 1, got M={self.M} H={self.H} r={self.r}")
        if self.r > self.H:
            raise DomainError(
                f"a model with H={self.H} components cannot realize r={self.r} true components"
            )

    @property
    def d(self) -> int:
        """Parameter count H-1+HM of the regular model."""

        return self.H - 1 + self.H * self.M


class RlctSource(str, enum.Enum):
    """Provenance of a learning coefficient value."""

    CLOSED_FORM = "closed-form"
    ENUMERATED = "enumerated"
    LOCAL = "local"
    COMBINATOR = "combinator"


ALLOWED_DENOMINATORS = frozenset({1, 2, 4})


@dataclass(slots=True, frozen=True)
class RlctValue:
    """Exact learning coefficient λ with denominator 1, 2 or 4."""

    value: Fraction
    source: RlctSource

    def __post_init__(self) -> None:
        value = Fraction(self.value)
        object.__setattr__(self, "value", value)
        if value <= 0:
            raise DomainError(f"a learning coefficient must be > 0, got {value}")
        if value.denominator not in ALLOWED_DENOMINATORS:
            raise DomainError(f"denominator of {value} is not 1, 2 or 4")

    @property
    def numerator(self) -> int:
        return self.value.numerator

    @property
    def denominator(self) -> int:
        return self.value.denominator

    def __float__(self) -> float:
        return float(self.value)

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda_num": self.numerator,
            "lambda_den": self.denominator,
            "lambda": float(self.value),
            "fraction": str(self.value),
            "source": self.source.value,
        }


RECORD_FIELDS: tuple[str, ...] = (
    "config_hash",
    "M",
    "H",
    "r",
    "n",
    "rep",
    "seed",
    "Gn",
    "L0",
    "wbic_lambda",
    "accept_w",
    "accept_b",
    "ess_proxy",
    "wall_ms",
)


def _format_optional(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _parse_optional(raw: str) -> float | None:
    raw = raw.strip()
    return None if raw == "" else float(raw)


@dataclass(slots=True)
class ExperimentRecord:
    """One (n, replication) cell of an experiment grid."""

    config_hash: str
    M: int
    H: int
    r: int
    n: int
    rep: int
    seed: int
    gn: float
    l0: float
    wbic_lambda: float | None
    accept_w: float | None
    accept_b: float
    ess_proxy: float
    wall_ms: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.gn):
            raise DomainError(f"G_n must be finite, got {self.gn!r} (n={self.n}, rep={self.rep})")

    @property
    def delta(self) -> float:
        """Centered generalization error G_n - L(w0); may be negative."""

        return self.gn - self.l0

    @property
    def key(self) -> tuple[int, int]:
        return self.n, self.rep

    def to_row(self) -> dict[str, str]:
        return {
            "config_hash": self.config_hash,
            "M": str(self.M),
            "H": str(self.H),
            "r": str(self.r),
            "n": str(self.n),
            "rep": str(self.rep),
            "seed": str(self.seed),
            "Gn": repr(float(self.gn)),
            "L0": repr(float(self.l0)),
            "wbic_lambda": _format_optional(self.wbic_lambda),
            "accept_w": _format_optional(self.accept_w),
            "accept_b": repr(float(self.accept_b)),
            "ess_proxy": repr(float(self.ess_proxy)),
            "wall_ms": str(self.wall_ms),
        }

    @classmethod
    def from_row(cls, row: Mapping[str, str]) -> "ExperimentRecord":
        try:
            return cls(
                config_hash=row["config_hash"],
                M=int(row["M"]),
                H=int(row["H"]),
                r=int(row["r"]),
                n=int(row["n"]),
                rep=int(row["rep"]),
                seed=int(row["seed"]),
                gn=float(row["Gn"]),
                l0=float(row["L0"]),
                wbic_lambda=_parse_optional(row["wbic_lambda"]),
                accept_w=_parse_optional(row["accept_w"]),
                accept_b=float(row["accept_b"]),
                ess_proxy=float(row["ess_proxy"]),
                wall_ms=int(row["wall_ms"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed record row {dict(row)!r}: {exc}") from exc
