"""
Taylor-remainder symbols of the shifted family a_s(xi, eta, theta) = |eta + theta xi|^s.

Taylor's formula in theta at theta = 0 with integral remainder gives

    a_s(xi, eta, 1) = sum_{m < l} (1/m!) d^m_theta a_s(xi, eta, 0)
                      + sum_{|alpha| = l} xi^alpha K_alpha(xi, eta)

    K_alpha = (l / alpha!) int_0^1 (1 - theta)^(l-1) (d^alpha |.|^s)(eta + theta xi) dtheta

TaylorRemainder evaluates t^alpha = K_alpha |eta|^(l-s), the symbol that acts
on the pair (d^alpha F, D^(s-l) G). The theta integral uses Gauss-Legendre
quadrature on [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..spectral import MultiIndex, norm_power_derivative
from . import Symbol, SymbolError, SymbolInfo, broadcast_pair
from .riesz import norm_power

DEFAULT_QUAD_ORDER = 32
MAX_QUAD_ORDER = 256


@lru_cache(maxsize=32)
def unit_gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    nodes, weights = leggauss(order)
    return (nodes + 1.0) / 2.0, weights / 2.0


@dataclass(frozen=True)
class TaylorRemainder(Symbol):
    info = SymbolInfo(
        name="taylor-remainder",
        description="Order-l Taylor remainder kernel t^alpha of |eta + theta xi|^s, l = |alpha|",
        help="Acts on (d^alpha F, D^(s-l) G); the result carries the factor (-i)^l",
    )

    s: float
    alpha: tuple[int, ...]
    quad_order: int = DEFAULT_QUAD_ORDER

    def __post_init__(self) -> None:
        if not math.isfinite(self.s) or self.s < 0:
            raise SymbolError("Exponent s must be a finite non-negative real", self.info.name, "s")
        try:
            index = MultiIndex(tuple(self.alpha))
        except Exception as e:
            raise SymbolError(str(e), self.info.name, "alpha") from e
        if index.order < 1:
            raise SymbolError("Remainder order |alpha| must be at least 1", self.info.name, "alpha")
        if not 1 <= self.quad_order <= MAX_QUAD_ORDER:
            raise SymbolError(
                f"quad_order must lie in [1, {MAX_QUAD_ORDER}]", self.info.name, "quad_order"
            )
        object.__setattr__(self, "alpha", index.entries)

    @property
    def index(self) -> MultiIndex:
        return MultiIndex(self.alpha)

    @property
    def order(self) -> int:
        return self.index.order

    def kernel(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """K_alpha(xi, eta) without the |eta|^(l-s) normalization."""
        xi, eta = broadcast_pair(xi, eta)
        index = self.index
        nodes, weights = unit_gauss_legendre(self.quad_order)
        total = np.zeros(xi.shape[:-1])
        singular = np.zeros(xi.shape[:-1], dtype=bool)
        for theta, weight in zip(nodes, weights, strict=True):
            values, flags = norm_power_derivative(eta + theta * xi, self.s, index)
            total = total + (weight * (1.0 - theta) ** (index.order - 1)) * values
            singular |= flags
        return (index.order / index.factorial) * total, singular

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        kernel, singular = self.kernel(xi, eta)
        normalization, flags = norm_power(eta, self.order - self.s)
        return kernel * normalization, singular | flags


@dataclass(frozen=True)
class FirstOrderRemainder(TaylorRemainder):
    info = SymbolInfo(
        name="first-order-remainder",
        description="First-order Taylor remainder kernel, |alpha| = 1",
    )

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.order != 1:
            raise SymbolError("First-order remainder needs |alpha| = 1", self.info.name, "alpha")


@dataclass(frozen=True)
class SecondOrderRemainder(TaylorRemainder):
    info = SymbolInfo(
        name="second-order-remainder",
        description="Second-order Taylor remainder kernel, |alpha| = 2",
    )

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.order != 2:
            raise SymbolError("Second-order remainder needs |alpha| = 2", self.info.name, "alpha")


def remainder_symbol_class(order: int) -> type[TaylorRemainder]:
    """The remainder variant used for Taylor order l."""
    return {1: FirstOrderRemainder, 2: SecondOrderRemainder}.get(order, TaylorRemainder)
