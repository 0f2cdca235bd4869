"""
Frequency-localized wrappers b(xi, eta) * w(|xi|, |eta|) built from a Littlewood-Paley family.

    low-high:  w = sum_k Psi_hat_{k-3}(xi) Phi_hat_k(eta)
    high-low:  w = sum_k Phi_hat_k(xi) Psi_hat_{k-3}(eta)
    diagonal:  w = sum_j Phi_hat_j(xi) sum_{|k-j| <= 2} Phi_hat_k(eta)

k and j run over the family bands. On the low-high support |xi| <= |eta|/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..littlewood_paley import LPFamily
from . import Symbol, SymbolError, SymbolInfo, broadcast_pair


def _norms(xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.sqrt(np.sum(xi**2, axis=-1)), np.sqrt(np.sum(eta**2, axis=-1))


class _Localized(Symbol):
    base: Symbol
    family: LPFamily

    def weight(self, xi_norm: np.ndarray, eta_norm: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        weight = self.weight(*_norms(xi, eta))
        if not np.any(weight):
            return np.zeros(weight.shape), np.zeros(weight.shape, dtype=bool)
        values, singular = self.base.evaluate_flagged(xi, eta)
        return values * weight, singular & (weight != 0)

    def parameters(self) -> dict:
        return {
            "base": self.base.describe(),
            "j_min": self.family.j_min,
            "j_max": self.family.j_max,
        }


def _check_base(base: Symbol, name: str) -> None:
    if not isinstance(base, Symbol):
        raise SymbolError("Localized symbols wrap another symbol", symbol=name, parameter="base")
    if isinstance(base, _Localized):
        raise SymbolError("Symbols are localized at most once", symbol=name, parameter="base")


@dataclass(frozen=True)
class LowHighLocalized(_Localized):
    info = SymbolInfo(
        name="low-high",
        description="b(xi, eta) sum_k Psi_hat_{k-3}(xi) Phi_hat_k(eta)",
    )

    base: Symbol
    family: LPFamily
    offset: int = 3

    def __post_init__(self) -> None:
        _check_base(self.base, self.info.name)

    def weight(self, xi_norm: np.ndarray, eta_norm: np.ndarray) -> np.ndarray:
        total = np.zeros(np.broadcast_shapes(xi_norm.shape, eta_norm.shape))
        for k in self.family.bands:
            low = self.family.psi_hat_at(xi_norm, k - self.offset)
            if np.any(low):
                total = total + low * self.family.phi_hat_at(eta_norm, k)
        return total


@dataclass(frozen=True)
class HighLowLocalized(_Localized):
    info = SymbolInfo(
        name="high-low",
        description="b(xi, eta) sum_k Phi_hat_k(xi) Psi_hat_{k-3}(eta)",
    )

    base: Symbol
    family: LPFamily
    offset: int = 3

    def __post_init__(self) -> None:
        _check_base(self.base, self.info.name)

    def weight(self, xi_norm: np.ndarray, eta_norm: np.ndarray) -> np.ndarray:
        total = np.zeros(np.broadcast_shapes(xi_norm.shape, eta_norm.shape))
        for k in self.family.bands:
            high = self.family.phi_hat_at(xi_norm, k)
            if np.any(high):
                total = total + high * self.family.psi_hat_at(eta_norm, k - self.offset)
        return total


@dataclass(frozen=True)
class DiagonalLocalized(_Localized):
    info = SymbolInfo(
        name="diagonal",
        description="b(xi, eta) sum_j Phi_hat_j(xi) sum_{|k-j| <= width} Phi_hat_k(eta)",
    )

    base: Symbol
    family: LPFamily
    width: int = 2

    def __post_init__(self) -> None:
        _check_base(self.base, self.info.name)

    def weight(self, xi_norm: np.ndarray, eta_norm: np.ndarray) -> np.ndarray:
        total = np.zeros(np.broadcast_shapes(xi_norm.shape, eta_norm.shape))
        bands = self.family.bands
        for j in bands:
            first = self.family.phi_hat_at(xi_norm, j)
            if not np.any(first):
                continue
            near = [k for k in bands if abs(k - j) <= self.width]
            total = total + first * sum(self.family.phi_hat_at(eta_norm, k) for k in near)
        return total


LOCALIZATIONS: dict[str, type[_Localized]] = {
    "low_high": LowHighLocalized,
    "high_low": HighLowLocalized,
    "diagonal": DiagonalLocalized,
}


def localize(base: Symbol, family: LPFamily, localization: str) -> Symbol:
    """Wrap `base` with a named localization; "none" returns it unchanged."""
    if localization == "none":
        return base
    if localization not in LOCALIZATIONS:
        raise SymbolError(
            f"Unknown localization, expected one of none, {', '.join(LOCALIZATIONS)}",
            symbol=base.name,
            parameter="localization",
        )
    return LOCALIZATIONS[localization](base, family)
