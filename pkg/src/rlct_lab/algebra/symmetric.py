"""Elementary symmetric coefficients and the power-sum recursions built on them.

For base points b_1..b_H the coefficients C_r^H of ∏(t + b_i) annihilate every weighted
power sum of order n > H, so any b_i^n is a fixed linear combination F^{(n)} of the powers
b_i^1..b_i^H. Tolerances are relative to a magnitude scale computed next to each residual.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DomainError


def _as_points(values: Sequence[float] | np.ndarray, name: str = "b") -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise DomainError(f"{name} must contain at least one value")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {arr.tolist()}")
    return arr


@dataclass(slots=True, frozen=True)
class Residual:
    """An identity residual together with the magnitude it should be judged against."""

    value: float
    scale: float

    @property
    def relative(self) -> float:
        if self.scale > 0.0:
            return abs(self.value) / self.scale
        return 0.0 if self.value == 0.0 else math.inf

    def within(self, tol: float) -> bool:
        return self.relative <= tol

    def to_dict(self) -> dict[str, float]:
        return {"residual": self.value, "scale": self.scale, "relative": self.relative}


@dataclass(slots=True, frozen=True, eq=False)
class SymCoeffs:
    """C_0^H..C_H^H: the coefficients of ∏(t + b_i) in descending powers of t."""

    base_points: np.ndarray
    coeffs: np.ndarray

    @property
    def H(self) -> int:
        return int(self.base_points.size)

    def evaluate(self, t: float) -> float:
        return float(np.polyval(self.coeffs, t))

    def vieta_residual(self, t: float) -> Residual:
        """Compare ∑_r C_r t^{H-r} against the product ∏(t + b_i) at ``t``."""

        product = float(np.prod(t + self.base_points))
        powers = np.abs(t) ** np.arange(self.H, -1, -1)
        scale = max(float(np.sum(np.abs(self.coeffs) * powers)), abs(product))
        return Residual(self.evaluate(t) - product, scale)


def elem_sym_coeffs(b: Sequence[float] | np.ndarray) -> SymCoeffs:
    """Expand ∏(t + b_i) by incremental convolution."""

    points = _as_points(b)
    coeffs = np.ones(1)
    for point in points:
        coeffs = np.convolve(coeffs, np.array([1.0, point]))
    points.setflags(write=False)
    coeffs.setflags(write=False)
    return SymCoeffs(points, coeffs)


def _weights_for(a: Sequence[float] | np.ndarray, H: int) -> np.ndarray:
    weights = np.asarray(a, dtype=float).reshape(-1)
    if weights.size != H:
        raise DomainError(f"expected {H} weights, got {weights.size}")
    if not np.all(np.isfinite(weights)):
        raise DomainError("weights must be finite")
    return weights


def annihilation_check(
    a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray, n: int
) -> Residual:
    """∑_{r=0}^H (-1)^r C_r^H ∑_i a_i b_i^{n-r}, which vanishes for every n > H."""

    points = _as_points(b)
    H = points.size
    weights = _weights_for(a, H)
    if n <= H:
        raise DomainError(f"annihilation needs n > H, got n={n}, H={H}")

    sym = elem_sym_coeffs(points)
    exponents = n - np.arange(H + 1)
    moments = (weights[None, :] * points[None, :] ** exponents[:, None]).sum(axis=1)
    abs_moments = (np.abs(weights)[None, :] * np.abs(points)[None, :] ** exponents[:, None]).sum(axis=1)
    signs = (-1.0) ** np.arange(H + 1)
    value = float(np.sum(signs * sym.coeffs * moments))
    scale = float(np.sum(np.abs(sym.coeffs) * abs_moments))
    return Residual(value, scale)


@dataclass(slots=True, frozen=True, eq=False)
class FTable:
    """F_i^{(n)} for i in [1:H] and n in [1:N]; row n-1 of ``table`` holds F^{(n)}."""

    base_points: np.ndarray
    table: np.ndarray

    @property
    def H(self) -> int:
        return int(self.base_points.size)

    @property
    def N(self) -> int:
        return int(self.table.shape[0])

    @property
    def growth_bound(self) -> float:
        """R = H·∏(1 + |b_i|)."""

        return float(self.H * np.prod(1.0 + np.abs(self.base_points)))

    def row(self, n: int) -> np.ndarray:
        if not 1 <= n <= self.N:
            raise DomainError(f"row n={n} outside the table range [1, {self.N}]")
        return self.table[n - 1]

    def bound_holds(self) -> bool:
        """Whether |F_i^{(n)}| <= R^n for every entry, compared in log space."""

        log_r = math.log(self.growth_bound)
        exponents = np.arange(1, self.N + 1, dtype=float)[:, None]
        magnitude = np.abs(self.table)
        with np.errstate(divide="ignore"):
            log_mag = np.log(magnitude)
        return bool(np.all(log_mag <= exponents * log_r + 1e-12))


def f_table(b: Sequence[float] | np.ndarray, N: int) -> FTable:
    """Build F^{(1)}..F^{(N)} bottom-up: Kronecker rows up to H, then the C_r recursion."""

    points = _as_points(b)
    if N < 1:
        raise DomainError(f"table size must be >= 1, got {N}")
    H = points.size
    coeffs = elem_sym_coeffs(points).coeffs
    recursion = np.array([(-1.0) ** (r + 1) * coeffs[r] for r in range(1, H + 1)])

    table = np.zeros((N, H))
    for n in range(1, N + 1):
        if n <= H:
            table[n - 1, n - 1] = 1.0
            continue
        # F^{(n)} = ∑_r (-1)^{r+1} C_r F^{(n-r)}; rows n-1..n-H, newest first.
        previous = table[n - 1 - H : n - 1][::-1]
        table[n - 1] = recursion @ previous

    points.setflags(write=False)
    table.setflags(write=False)
    return FTable(points, table)


def f_coeffs(b: Sequence[float] | np.ndarray, n: int) -> np.ndarray:
    """F_1^{(n)}..F_H^{(n)} with ∑_i a_i b_i^n = ∑_i F_i^{(n)} ∑_j a_j b_j^i for all a."""

    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return np.array(f_table(b, n).row(n))


def _as_matrix(b: np.ndarray | Sequence[Sequence[float]]) -> np.ndarray:
    arr = np.asarray(b, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise DomainError(f"rates must form an H x M matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("rates must be finite")
    return arr


def _as_multi_index(n: Sequence[int] | int, M: int) -> tuple[int, ...]:
    index = (int(n),) if np.isscalar(n) else tuple(int(v) for v in n)
    if len(index) != M:
        raise DomainError(f"multi-index needs {M} entries, got {len(index)}")
    if any(v < 1 for v in index):
        raise DomainError(f"multi-index entries must be >= 1, got {index}")
    return index


def f_coeffs_multi(
    b: np.ndarray | Sequence[Sequence[float]], n: Sequence[int] | int
) -> dict[tuple[int, ...], float]:
    """Sparse F_r^{(n)} = ∏_m F_{r_m}^{(n_m)}(b_{·m}); keys are 1-based multi-indices r."""

    rates = _as_matrix(b)
    index = _as_multi_index(n, rates.shape[1])
    columns = [f_coeffs(rates[:, m], n_m) for m, n_m in enumerate(index)]
    supports = [np.flatnonzero(column) for column in columns]

    result: dict[tuple[int, ...], float] = {}
    for combo in itertools.product(*supports):
        value = 1.0
        for column, i in zip(columns, combo):
            value *= column[i]
        result[tuple(int(i) + 1 for i in combo)] = float(value)
    return result


def power_sum_reconstruction(
    a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray, n: int
) -> Residual:
    """∑_i a_i b_i^n minus its reconstruction from the first H power sums."""

    points = _as_points(b)
    weights = _weights_for(a, points.size)
    coeffs = f_coeffs(points, n)
    orders = np.arange(1, points.size + 1)
    basis = (weights[None, :] * points[None, :] ** orders[:, None]).sum(axis=1)
    abs_basis = (np.abs(weights)[None, :] * np.abs(points)[None, :] ** orders[:, None]).sum(axis=1)

    target = float(np.sum(weights * points**n))
    rebuilt = float(np.sum(coeffs * basis))
    scale = float(np.sum(np.abs(weights) * np.abs(points) ** n) + np.sum(np.abs(coeffs) * abs_basis))
    return Residual(target - rebuilt, scale)


def multi_power_sum_reconstruction(
    a: Sequence[float] | np.ndarray,
    b: np.ndarray | Sequence[Sequence[float]],
    n: Sequence[int] | int,
) -> Residual:
    """The multidimensional identity ∑_k a_k b_k^n = ∑_r F_r^{(n)} ∑_k a_k b_k^r."""

    rates = _as_matrix(b)
    weights = _weights_for(a, rates.shape[0])
    index = _as_multi_index(n, rates.shape[1])

    def moment(exponent: Sequence[int], absolute: bool = False) -> float:
        base, coef = (np.abs(rates), np.abs(weights)) if absolute else (rates, weights)
        return float(np.sum(coef * np.prod(base ** np.asarray(exponent), axis=1)))

    coeffs = f_coeffs_multi(rates, index)
    target = moment(index)
    rebuilt = sum(value * moment(r) for r, value in coeffs.items())
    scale = moment(index, absolute=True) + sum(
        abs(value) * moment(r, absolute=True) for r, value in coeffs.items()
    )
    return Residual(target - rebuilt, scale)
