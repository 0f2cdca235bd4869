"""
Symbol Interface and Registry for fraclr.

A symbol is a real function b(xi, eta) of two frequency vectors. Bilinear
operators B(F, G)(x) = sum_{xi, eta} exp(i x.(xi + eta)) b(xi, eta) F_hat(xi) G_hat(eta)
are evaluated from it by the routines in fraclr.bilinear.

Usage:
    from fraclr.symbols import Symbol, SymbolInfo, SymbolRegistry

    # Create a custom symbol
    @dataclass(frozen=True)
    class Product(Symbol):
        info = SymbolInfo(name="product", description="xi . eta")

        def evaluate_flagged(self, xi, eta):
            values = np.sum(xi * eta, axis=-1)
            return values, np.zeros(values.shape, dtype=bool)

    # Register the symbol
    SymbolRegistry.register(Product)

    # Build an instance by name
    symbol = SymbolRegistry.get("sum-riesz", s=1.5)
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields, is_dataclass
from typing import Any, ClassVar

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class SymbolInfo:
    """Metadata about a symbol variant."""

    name: str
    description: str
    separable: bool = False
    help: str = ""


class SymbolError(Exception):
    """Base exception for symbol construction and evaluation errors."""

    def __init__(self, message: str, symbol: str | None = None, parameter: str | None = None):
        self.message = message
        self.symbol = symbol
        self.parameter = parameter
        super().__init__(message)

    def __str__(self) -> str:
        parts = [self.message]
        if self.symbol:
            parts.insert(0, f"[{self.symbol}]")
        if self.parameter:
            parts.append(f"(parameter: {self.parameter})")
        return " ".join(parts)


def broadcast_pair(xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Broadcast two frequency arrays of shape (..., dim) against each other."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if xi.shape[-1] != eta.shape[-1]:
        raise SymbolError(
            f"Frequency dimensions differ: {xi.shape[-1]} and {eta.shape[-1]}", parameter="dim"
        )
    return np.broadcast_arrays(xi, eta)


class Symbol(ABC):
    """
    Base class for all bilinear symbols.

    Symbols are immutable parameter records. Evaluation is vectorized: xi and
    eta are arrays of shape (..., dim) that broadcast against each other, and
    the result has the broadcast leading shape.

    To create a custom symbol:
    1. Inherit from Symbol (usually as a frozen dataclass)
    2. Set the `info` class attribute with symbol metadata
    3. Implement `evaluate_flagged`
    4. Register the class with SymbolRegistry.register()
    """

    info: ClassVar[SymbolInfo]

    @abstractmethod
    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Evaluate the symbol at frequency pairs.

        Args:
            xi: First frequencies, shape (..., dim)
            eta: Second frequencies, shape (..., dim)

        Returns:
            (values, singular): real values and a mask of pairs where the
            closed form is singular. Singular pairs evaluate to 0.
        """
        ...

    def evaluate(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return self.evaluate_flagged(xi, eta)[0]

    def __call__(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return self.evaluate(xi, eta)

    @property
    def name(self) -> str:
        return self.info.name

    def parameters(self) -> dict[str, Any]:
        """Scalar parameters of the variant, for reports."""
        if not is_dataclass(self):
            return {}
        result: dict[str, Any] = {}
        for item in fields(self):
            value = getattr(self, item.name)
            if isinstance(value, Symbol):
                result[item.name] = value.describe()
            elif isinstance(value, (int, float, str, bool, tuple)):
                result[item.name] = value
        return result

    def describe(self) -> dict[str, Any]:
        return {"name": self.name, **self.parameters()}


class SymbolRegistry:
    """
    Registry of symbol variants.

    Maps variant names to symbol classes so that plans, the CLI and plugins
    can refer to symbols by name.
    """

    _symbols: dict[str, type[Symbol]] = {}

    @classmethod
    def register(cls, symbol_class: type[Symbol], name: str | None = None) -> None:
        """
        Register a symbol class.

        Raises:
            ValueError: If the class is missing its SymbolInfo
            KeyError: If a symbol with the same name is already registered
        """
        if not isinstance(getattr(symbol_class, "info", None), SymbolInfo):
            raise ValueError(f"Symbol {symbol_class.__name__} must have a SymbolInfo attribute")

        symbol_name = name or symbol_class.info.name
        if symbol_name in cls._symbols:
            raise KeyError(f"Symbol '{symbol_name}' is already registered")

        cls._symbols[symbol_name] = symbol_class

    @classmethod
    def get(cls, name: str, **parameters: Any) -> Symbol:
        """
        Build a symbol instance by name.

        Raises:
            KeyError: If no symbol with the given name is registered
            SymbolError: If the parameters do not fit the variant
        """
        if name not in cls._symbols:
            available = ", ".join(sorted(cls._symbols))
            raise KeyError(f"Symbol '{name}' not found. Available symbols: {available}")
        try:
            return cls._symbols[name](**parameters)
        except TypeError as e:
            raise SymbolError(f"Invalid parameters: {e}", symbol=name) from e

    @classmethod
    def list_symbols(cls) -> list[SymbolInfo]:
        return [symbol.info for symbol in cls._symbols.values()]

    @classmethod
    def is_registered(cls, name: str) -> bool:
        return name in cls._symbols

    @classmethod
    def clear(cls) -> None:
        cls._symbols.clear()

    @classmethod
    def discover_plugins(cls, entry_point_group: str = "fraclr.symbols") -> None:
        """Register symbol classes published by installed packages as entry points."""
        from importlib.metadata import entry_points

        for ep in entry_points(group=entry_point_group):
            try:
                symbol_class = ep.load()
            except Exception as e:
                logger.warning("Could not load symbol plugin %s: %s", ep.name, e)
                continue
            if isinstance(symbol_class, type) and issubclass(symbol_class, Symbol):
                if not cls.is_registered(symbol_class.info.name):
                    cls.register(symbol_class)


__all__ = [
    "Symbol",
    "SymbolError",
    "SymbolInfo",
    "SymbolRegistry",
    "broadcast_pair",
]
