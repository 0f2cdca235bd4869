"""
Deterministic test-function families for fraclr sweeps.

Random spectra come from numpy's Philox-4x64 counter-based generator keyed
by the seed. Coefficients are drawn mode by mode in a fixed order that does
not depend on the grid size, so a seed names the same function on every
grid that resolves it.

Families:
    localized_pair(k)            f = P_{<=k-3} noise, g = P_k noise
    gaussian(center, width)      mean-free Gaussian bumps, g shifted by one width
    dilation(base_k, t)          localized pair dilated by 2^(t - t_min)
    random_bandlimited(lo, hi)   noise restricted to 2^lo <= |xi| <= 2^hi
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .littlewood_paley import LPFamily, build_family, project, project_leq
from .spectral import GridSpec, RealField, SpectralField, dilate, lp_norm, to_spectral

logger = logging.getLogger(__name__)

FAMILY_KINDS = ("localized_pair", "gaussian", "dilation", "random_bandlimited")
LEAKAGE_TOLERANCE = 1e-13
# Offset between the seeds of the two members of a pair.
PAIR_SEED_OFFSET = 1
DILATION_T_MIN = -2


class GenerationError(Exception):
    """Exception raised when a test-function family cannot be generated."""

    def __init__(self, message: str, family: str | None = None) -> None:
        self.message = message
        self.family = family
        super().__init__(message)

    def __str__(self) -> str:
        if self.family:
            return f"[{self.family}] {self.message}"
        return self.message


def dilation_grid() -> tuple[GridSpec, LPFamily]:
    """Grid and family hosting the dilation family; large enough for lambda = 16."""
    grid = GridSpec(dim=1, points_per_axis=4096, period=2 * math.pi)
    return grid, build_family(grid, 0, 10)


def _philox(seed: int) -> np.random.Generator:
    if seed < 0:
        raise GenerationError(f"Seeds must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed))


def _half_lattice(dim: int, bound: int) -> list[tuple[int, ...]]:
    """Modes with one representative per +-k pair, in a grid-independent order."""
    if dim == 1:
        return [(k,) for k in range(1, bound + 1)]
    return [
        (k1, k2)
        for k1 in range(0, bound + 1)
        for k2 in range(-bound, bound + 1)
        if k1 > 0 or k2 > 0
    ]


def random_spectrum(
    grid: GridSpec, seed: int, max_frequency: float, min_frequency: float = 0.0
) -> RealField:
    """
    Seeded real noise with spectrum in min_frequency <= |xi| <= max_frequency.

    Raises:
        GenerationError: If max_frequency reaches the Nyquist frequency.
    """
    bound = math.floor(max_frequency * grid.period / (2 * math.pi))
    if bound >= grid.points_per_axis // 2:
        raise GenerationError(
            f"Frequency cap {max_frequency} aliases on N={grid.points_per_axis}", "noise"
        )
    rng = _philox(seed)
    coeffs = np.zeros(grid.shape, dtype=complex)
    n = grid.points_per_axis
    for mode in _half_lattice(grid.dim, bound):
        re, im = rng.standard_normal(2)
        norm = 2 * math.pi / grid.period * math.sqrt(sum(k * k for k in mode))
        if not min_frequency <= norm <= max_frequency:
            continue
        value = complex(re, im)
        coeffs[tuple(k % n for k in mode)] = value
        coeffs[tuple(-k % n for k in mode)] = value.conjugate()
    return SpectralField(grid, coeffs).to_real()


def _normalized(f: RealField, family: str) -> RealField:
    norm = lp_norm(f, 2)
    if norm == 0:
        raise GenerationError("Generated field vanishes on this grid", family)
    return f / norm


def _leakage(f: RealField, inside: np.ndarray) -> float:
    energy = np.abs(to_spectral(f).coeffs) ** 2
    total = float(np.sum(energy))
    return float(np.sum(energy[~inside])) / total if total else 0.0


@dataclass(frozen=True)
class FamilySpec:
    """
    One test-function family instance.

    Only the parameters of the chosen kind are used; `label` and `params`
    describe the instance in reports.
    """

    kind: str
    grid: GridSpec
    fam: LPFamily
    k: int = 4
    seed: int = 0
    center: float | None = None
    width: float | None = None
    t: int = 0
    j_lo: int = 0
    j_hi: int = 1

    def __post_init__(self) -> None:
        if self.kind not in FAMILY_KINDS:
            raise GenerationError(f"Unknown family kind, expected one of {FAMILY_KINDS}", self.kind)
        if self.fam.grid != self.grid:
            raise GenerationError("Family and grid disagree", self.kind)

    @property
    def dilation_factor(self) -> int:
        return 2 ** (self.t - DILATION_T_MIN) if self.kind == "dilation" else 1

    @property
    def label(self) -> str:
        if self.kind == "localized_pair":
            return f"localized_pair(k={self.k})"
        if self.kind == "gaussian":
            return "gaussian"
        if self.kind == "dilation":
            return f"dilation(k={self.k},t={self.t})"
        return f"random_bandlimited({self.j_lo},{self.j_hi},seed={self.seed})"

    def params(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "k": self.k if self.kind in ("localized_pair", "dilation") else "",
            "lambda": self.dilation_factor,
            "seed": self.seed,
            "N": self.grid.points_per_axis,
        }


def product_band_edge(k: int) -> float:
    """Largest |xi| in the spectrum of f g for the localized pair at band k."""
    return 2.0 ** (k + 1) + 2.0 ** (k - 2)


def localized_pair(grid: GridSpec, fam: LPFamily, k: int, seed: int = 0) -> tuple[RealField, RealField]:
    """
    f = P_{<=k-3}(noise), g = P_k(noise'), with f supported in |xi| <= 2^(k-2)
    and g in 2^(k-1) <= |xi| <= 2^(k+1).

    The product f g is supported in |xi| <= 2^(k+1) + 2^(k-2), which must stay
    below the Nyquist frequency so that pointwise products do not alias.

    Raises:
        GenerationError: If k is outside the family bands, the product aliases
            or leakage exceeds 1e-13.
    """
    if not fam.j_min <= k <= fam.j_max:
        raise GenerationError(f"Band k={k} outside [{fam.j_min}, {fam.j_max}]", "localized_pair")
    if product_band_edge(k) >= grid.nyquist:
        raise GenerationError(
            f"Product of band k={k} reaches |xi| = {product_band_edge(k):g}, "
            f"at or above the Nyquist frequency {grid.nyquist:g}",
            "localized_pair",
        )
    cap = 2.0 ** (k + 1)
    f = project_leq(random_spectrum(grid, seed, cap), fam, k - 3)
    g = project(random_spectrum(grid, seed + PAIR_SEED_OFFSET, cap), fam, k)

    norm = grid.frequency_norm
    leaks = (
        _leakage(f, norm <= 2.0 ** (k - 2)),
        _leakage(g, (norm >= 2.0 ** (k - 1)) & (norm <= 2.0 ** (k + 1))),
    )
    if max(leaks) > LEAKAGE_TOLERANCE:
        raise GenerationError(f"Spectral leakage {max(leaks):.3e} above tolerance", "localized_pair")
    return _normalized(f, "localized_pair"), _normalized(g, "localized_pair")


def gaussian_pair(
    grid: GridSpec, center: float | None = None, width: float | None = None
) -> tuple[RealField, RealField]:
    """
    Mean-free Gaussians of width sigma (default L/40); g sits one width to the right of f.

    Raises:
        GenerationError: If the bump does not decay to 1e-14 of its peak at the boundary.
    """
    sigma = width if width is not None else grid.period / 40
    c = center if center is not None else grid.period / 2
    if math.exp(-((grid.period / 2) ** 2) / (2 * sigma**2)) > 1e-14:
        raise GenerationError(f"Width {sigma} too wide for period {grid.period}", "gaussian")

    def bump(shift: float) -> RealField:
        offsets = [c + shift] + [c] * (grid.dim - 1)
        coordinates = grid.centered_coordinates(offsets)
        values = np.exp(-sum(x**2 for x in coordinates) / (2 * sigma**2))
        return RealField(grid, values - values.mean())

    return _normalized(bump(0.0), "gaussian"), _normalized(bump(sigma), "gaussian")


def random_bandlimited(
    grid: GridSpec, fam: LPFamily, j_lo: int, j_hi: int, seed: int
) -> RealField:
    """Seeded field with spectrum in 2^j_lo <= |xi| <= 2^j_hi, normalized in L^2."""
    if not fam.j_min <= j_lo < j_hi <= fam.j_max:
        raise GenerationError(
            f"Bands [{j_lo}, {j_hi}] outside [{fam.j_min}, {fam.j_max}]", "random_bandlimited"
        )
    field_ = random_spectrum(grid, seed, 2.0**j_hi, 2.0**j_lo)
    return _normalized(field_, "random_bandlimited")


def generate(fspec: FamilySpec) -> tuple[RealField, RealField]:
    """
    Generate the (f, g) pair of a family instance, both normalized to ||.||_2 = 1.

    Raises:
        GenerationError: If a band index is outside the family range.
    """
    if fspec.kind == "localized_pair":
        return localized_pair(fspec.grid, fspec.fam, fspec.k, fspec.seed)
    if fspec.kind == "gaussian":
        return gaussian_pair(fspec.grid, fspec.center, fspec.width)
    if fspec.kind == "random_bandlimited":
        f = random_bandlimited(fspec.grid, fspec.fam, fspec.j_lo, fspec.j_hi, fspec.seed)
        g = random_bandlimited(
            fspec.grid, fspec.fam, fspec.j_lo, fspec.j_hi, fspec.seed + PAIR_SEED_OFFSET
        )
        return f, g

    base_f, base_g = localized_pair(fspec.grid, fspec.fam, fspec.k, fspec.seed)
    factor = fspec.dilation_factor
    top = fspec.k + 1 + (fspec.t - DILATION_T_MIN)
    if top > fspec.fam.j_max:
        raise GenerationError(
            f"Dilated band 2^{top} leaves the resolvable window [.., {fspec.fam.j_max}]", "dilation"
        )
    logger.debug("Dilating localized pair k=%d by %d", fspec.k, factor)
    return (
        _normalized(dilate(base_f, factor), "dilation"),
        _normalized(dilate(base_g, factor), "dilation"),
    )
