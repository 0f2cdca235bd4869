"""Tabulated symbols given by their values on a grid's frequency lattice."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..spectral import GridSpec
from . import Symbol, SymbolError, SymbolInfo, broadcast_pair


@dataclass(frozen=True, eq=False)
class Custom(Symbol):
    """
    A symbol stored as a table over all lattice pairs.

    The table has shape grid.shape + grid.shape and is indexed by the FFT
    positions of xi and eta. Frequencies off the lattice are rounded to the
    nearest lattice point.
    """

    info = SymbolInfo(name="custom", description="Tabulated values on the frequency lattice")

    grid: GridSpec
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.array(self.table, dtype=float, copy=True)
        expected = self.grid.shape * 2
        if table.shape != expected:
            raise SymbolError(
                f"Table shape {table.shape} does not match {expected}", self.info.name, "table"
            )
        if not np.all(np.isfinite(table)):
            raise SymbolError("Table values must be finite", self.info.name, "table")
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(
        cls, grid: GridSpec, func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    ) -> Custom:
        """Tabulate func(xi, eta) over every lattice pair."""
        vectors = grid.frequency_vectors
        xi = vectors.reshape(grid.shape + (1,) * grid.dim + (grid.dim,))
        eta = vectors.reshape((1,) * grid.dim + grid.shape + (grid.dim,))
        return cls(grid, np.broadcast_to(func(xi, eta), grid.shape * 2))

    def _lattice_index(self, frequencies: np.ndarray) -> tuple[np.ndarray, ...]:
        modes = np.rint(frequencies * self.grid.period / (2 * math.pi)).astype(int)
        modes = modes % self.grid.points_per_axis
        return tuple(modes[..., axis] for axis in range(self.grid.dim))

    def evaluate_flagged(self, xi: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi, eta = broadcast_pair(xi, eta)
        if xi.shape[-1] != self.grid.dim:
            raise SymbolError("Frequency dimension differs from the table grid", self.name, "dim")
        values = self.table[self._lattice_index(xi) + self._lattice_index(eta)]
        return values, np.zeros(values.shape, dtype=bool)

    def parameters(self) -> dict:
        return {"N": self.grid.points_per_axis, "L": self.grid.period, "dim": self.grid.dim}
