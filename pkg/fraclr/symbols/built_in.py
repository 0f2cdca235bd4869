"""Built-in symbol loader for fraclr.

This module registers all built-in symbol variants with the SymbolRegistry.
"""

from . import SymbolRegistry
from .localized import DiagonalLocalized, HighLowLocalized, LowHighLocalized
from .riesz import (
    Constant,
    EtaDeriv,
    GradientCorrectedRemainder,
    KpvRemainder,
    ShiftedRiesz,
    SumRiesz,
    ThetaDeriv,
)
from .tabulated import Custom
from .taylor import FirstOrderRemainder, SecondOrderRemainder, TaylorRemainder

BUILT_IN_SYMBOLS = (
    Constant,
    SumRiesz,
    ShiftedRiesz,
    ThetaDeriv,
    EtaDeriv,
    KpvRemainder,
    GradientCorrectedRemainder,
    TaylorRemainder,
    FirstOrderRemainder,
    SecondOrderRemainder,
    Custom,
    LowHighLocalized,
    HighLowLocalized,
    DiagonalLocalized,
)


def register_built_in_symbols() -> None:
    """Register all built-in symbols with the registry.

    Safe to call repeatedly; names already present are skipped.
    """
    for symbol_class in BUILT_IN_SYMBOLS:
        if not SymbolRegistry.is_registered(symbol_class.info.name):
            SymbolRegistry.register(symbol_class)


# Auto-register on import
register_built_in_symbols()
