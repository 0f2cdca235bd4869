"""
Riesz-type symbols: |xi + eta|^s, the shifted family a_s = |eta + theta xi|^s
and its theta- and eta-derivatives.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..spectral import MultiIndex, norm_power_derivative
from . import Symbol, SymbolError, SymbolInfo, broadcast_pair

THETA_COEFFICIENTS = ("multinomial", "printed")


def norm_power(vectors: np.ndarray, s: float) -> tuple[np.ndarray, np.ndarray]:
    """|v|^s with |0|^0 = 1 and |0|^s = 0 otherwise; negative s flags v = 0."""
    return norm_power_derivative(vectors, s, MultiIndex((0,) * vectors.shape[-1]))


def _check_order(s: float, name: str) -> None:
    if not math.isfinite(s):
        raise SymbolError("Exponent must be finite", symbol=name, parameter="s")


def _check_theta(theta: float, name: str) -> None:
    if not 0.0 <= theta <= 1.0:
        raise SymbolError("theta must lie in [0, 1]", symbol=name, parameter="theta")


@dataclass(frozen=True)
class SeparableTerm:
    """
    One term c * xi^alpha * mu(eta) of a symbol that factors over (xi, eta).

    Applied to (F, G) the term is c (-i)^|alpha| d^alpha F * (mu(D) G).
    """

    f_index: MultiIndex
    weight: float
    multiplier: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Constant(Symbol):
    info = SymbolInfo(name="constant", description="Constant symbol c; B(F, G) = c F G")

    c: float = 1.0

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        shape = xi.shape[:-1]
        return np.full(shape, float(self.c)), np.zeros(shape, dtype=bool)


@dataclass(frozen=True)
class SumRiesz(Symbol):
    info = SymbolInfo(name="sum-riesz", description="|xi + eta|^s; B(F, G) = D^s(F G)")

    s: float

    def __post_init__(self) -> None:
        _check_order(self.s, self.info.name)

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        return norm_power(xi + eta, self.s)


@dataclass(frozen=True)
class ShiftedRiesz(Symbol):
    info = SymbolInfo(
        name="shifted-riesz",
        description="a_s(xi, eta, theta) = |eta + theta xi|^s",
        separable=True,
        help="theta = 0 gives F D^s G, theta = 1 gives D^s(F G)",
    )

    s: float
    theta: float

    def __post_init__(self) -> None:
        _check_order(self.s, self.info.name)
        _check_theta(self.theta, self.info.name)

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        if self.theta == 1.0:
            return norm_power(xi + eta, self.s)
        return norm_power(eta + self.theta * xi, self.s)

    def separable_terms(self, dim: int) -> list[SeparableTerm]:
        if self.theta != 0:
            raise SymbolError("Only theta = 0 factors over (xi, eta)", symbol=self.name)
        return ThetaDeriv(self.s, 0.0, 0).separable_terms(dim)


@dataclass(frozen=True)
class ThetaDeriv(Symbol):
    """
    (1/m!) d^m/dtheta^m a_s = (1/m!) sum_{|alpha|=m} w_alpha xi^alpha (d^alpha |.|^s)(eta + theta xi).

    The chain rule gives w_alpha = m!/alpha!. coefficient="printed" swaps in
    w_alpha = alpha!, which is wrong for m >= 2 and only serves as a
    negative control.
    """

    info = SymbolInfo(
        name="theta-deriv",
        description="(1/m!) d^m/dtheta^m |eta + theta xi|^s",
        separable=True,
    )

    s: float
    theta: float
    m: int
    coefficient: str = "multinomial"

    def __post_init__(self) -> None:
        _check_order(self.s, self.info.name)
        _check_theta(self.theta, self.info.name)
        if not 0 <= self.m <= 4:
            raise SymbolError("Derivative order m must lie in [0, 4]", self.info.name, "m")
        if self.coefficient not in THETA_COEFFICIENTS:
            raise SymbolError(
                f"coefficient must be one of {THETA_COEFFICIENTS}", self.info.name, "coefficient"
            )

    def weight(self, alpha: MultiIndex) -> float:
        """w_alpha / m!"""
        if self.coefficient == "printed":
            return alpha.factorial / math.factorial(self.m)
        return 1.0 / alpha.factorial

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        point = eta + self.theta * xi
        total = np.zeros(xi.shape[:-1])
        singular = np.zeros(xi.shape[:-1], dtype=bool)
        for alpha in MultiIndex.of_order(xi.shape[-1], self.m):
            derivative, flags = norm_power_derivative(point, self.s, alpha)
            total = total + self.weight(alpha) * alpha.monomial(xi) * derivative
            singular |= flags
        return total, singular

    def separable_terms(self, dim: int) -> list[SeparableTerm]:
        if self.theta != 0:
            raise SymbolError("Only theta = 0 factors over (xi, eta)", symbol=self.name)
        return [
            SeparableTerm(
                alpha,
                self.weight(alpha),
                lambda eta, alpha=alpha: norm_power_derivative(eta, self.s, alpha)[0],
            )
            for alpha in MultiIndex.of_order(dim, self.m)
        ]


@dataclass(frozen=True)
class EtaDeriv(Symbol):
    info = SymbolInfo(
        name="eta-deriv",
        description="(alpha!/|alpha|!) d^alpha_eta |eta + theta xi|^s",
        separable=True,
    )

    s: float
    theta: float
    alpha: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_order(self.s, self.info.name)
        _check_theta(self.theta, self.info.name)
        try:
            object.__setattr__(self, "alpha", MultiIndex(tuple(self.alpha)).entries)
        except Exception as e:
            raise SymbolError(str(e), self.info.name, "alpha") from e

    @property
    def index(self) -> MultiIndex:
        return MultiIndex(self.alpha)

    @property
    def weight(self) -> float:
        return self.index.factorial / math.factorial(self.index.order)

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        values, singular = norm_power_derivative(eta + self.theta * xi, self.s, self.index)
        return self.weight * values, singular

    def separable_terms(self, dim: int) -> list[SeparableTerm]:
        if self.theta != 0:
            raise SymbolError("Only theta = 0 factors over (xi, eta)", symbol=self.name)
        if len(self.alpha) != dim:
            raise SymbolError("Multi-index length differs from the grid dimension", self.name, "alpha")
        index = self.index
        return [
            SeparableTerm(
                MultiIndex((0,) * dim),
                self.weight,
                lambda eta: norm_power_derivative(eta, self.s, index)[0],
            )
        ]


@dataclass(frozen=True)
class KpvRemainder(Symbol):
    info = SymbolInfo(
        name="kpv-remainder",
        description="|xi + eta|^s - |eta|^s - |xi|^s; B(F, G) = D^s(FG) - F D^s G - G D^s F",
    )

    s: float

    def __post_init__(self) -> None:
        _check_order(self.s, self.info.name)

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        total, singular = norm_power(xi + eta, self.s)
        for v in (eta, xi):
            values, flags = norm_power(v, self.s)
            total = total - values
            singular |= flags
        return total, singular


@dataclass(frozen=True)
class GradientCorrectedRemainder(Symbol):
    info = SymbolInfo(
        name="gradient-corrected-remainder",
        description="|xi + eta|^s - |eta|^s - |xi|^s - s |xi + eta|^(s-2) xi . eta",
        help="B(F, G) = D^s(FG) - F D^s G - G D^s F + s D^(s-2)(grad F . grad G)",
    )

    s: float

    def __post_init__(self) -> None:
        _check_order(self.s, self.info.name)

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        total, singular = KpvRemainder(self.s).evaluate_flagged(xi, eta)
        weight, flags = norm_power(xi + eta, self.s - 2)
        return total - self.s * weight * np.sum(xi * eta, axis=-1), singular | flags
