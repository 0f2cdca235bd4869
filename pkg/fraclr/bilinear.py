"""
Bilinear Fourier multipliers for fraclr.

B(F, G)(x) = sum_{xi, eta} exp(i x.(xi + eta)) b(xi, eta) F_hat(xi) G_hat(eta)

The direct double sum over all lattice pairs is the reference evaluation;
the separable path, the paraproduct pieces and the Taylor remainders are all
checked against it.

Usage:
    from fraclr.bilinear import bilinear_apply_direct, decompose
    from fraclr.symbols.riesz import SumRiesz

    product_derivative = bilinear_apply_direct(SumRiesz(1.5), f, g)
    pieces = decompose(SumRiesz(1.5), f, g, fam)
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .littlewood_paley import LPFamily, project, project_leq
from .spectral import (
    MultiIndex,
    RealField,
    SpectralField,
    norm_power_derivative,
    partial_derivative,
    riesz_potential,
    to_complex_values,
    to_spectral,
)
from .symbols import Symbol, SymbolError
from .symbols.localized import (
    DiagonalLocalized,
    HighLowLocalized,
    LowHighLocalized,
)
from .symbols.riesz import ThetaDeriv
from .symbols.taylor import DEFAULT_QUAD_ORDER, remainder_symbol_class

logger = logging.getLogger(__name__)

# Largest N per dimension for the O(N^(2 dim)) direct sum.
DIRECT_SUM_LIMITS = {1: 512, 2: 64}
DECOMPOSITION_TOLERANCE = 1e-10


class BilinearError(Exception):
    """Exception raised for invalid bilinear evaluations."""

    def __init__(self, message: str, operation: str | None = None) -> None:
        self.message = message
        self.operation = operation
        super().__init__(message)

    def __str__(self) -> str:
        if self.operation:
            return f"[{self.operation}] {self.message}"
        return self.message


def _check_pair(F: RealField, G: RealField, operation: str) -> None:
    if F.grid != G.grid:
        raise BilinearError("Inputs live on different grids", operation)


def _check_family(F: RealField, fam: LPFamily, operation: str) -> None:
    if F.grid != fam.grid:
        raise BilinearError("Inputs and family live on different grids", operation)


@dataclass(frozen=True)
class DirectSum:
    """Spectrum of B(F, G) and the number of frequency pairs hitting a singular point."""

    spectrum: SpectralField
    singular_pairs: int


def bilinear_direct_sum(sym: Symbol, F: RealField, G: RealField) -> DirectSum:
    """
    Evaluate B(F, G) by the double sum over all lattice pairs.

    Output modes xi + eta fold periodically onto the lattice. Rows are
    accumulated in a fixed order, so the result is bitwise reproducible.

    Raises:
        BilinearError: On grid mismatch or when N exceeds the direct-sum limit.
    """
    _check_pair(F, G, "direct")
    grid = F.grid
    if grid.points_per_axis > DIRECT_SUM_LIMITS[grid.dim]:
        raise BilinearError(
            f"Direct sum limited to N <= {DIRECT_SUM_LIMITS[grid.dim]} in {grid.dim}D, "
            f"got N={grid.points_per_axis}",
            "direct",
        )

    f_hat = to_spectral(F).coeffs
    g_hat = to_spectral(G).coeffs
    eta = grid.frequency_vectors
    axes = tuple(range(grid.dim))
    total = np.zeros(grid.shape, dtype=complex)
    singular_pairs = 0

    for index in np.ndindex(*grid.shape):
        coefficient = f_hat[index]
        if coefficient == 0:
            continue
        values, singular = sym.evaluate_flagged(eta[index], eta)
        singular_pairs += int(np.count_nonzero(singular & (g_hat != 0)))
        total += np.roll(values * g_hat * coefficient, index, axis=axes)

    if singular_pairs:
        logger.debug("%s hit %d singular pairs", sym.name, singular_pairs)
    return DirectSum(SpectralField(grid, total), singular_pairs)


def bilinear_apply_direct(sym: Symbol, F: RealField, G: RealField) -> RealField:
    """Direct double-sum evaluation of B(F, G), real part."""
    return bilinear_direct_sum(sym, F, G).spectrum.to_real()


def _unlocalized(sym: Symbol) -> tuple[Symbol, LPFamily | None]:
    if isinstance(sym, LowHighLocalized):
        if sym.offset != 3:
            raise BilinearError("Separable path supports the offset-3 low-high wrapper", "separable")
        return sym.base, sym.family
    if isinstance(sym, (HighLowLocalized, DiagonalLocalized)):
        raise BilinearError(f"Localization '{sym.name}' has no separable form", "separable")
    return sym, None


def _separable_values(base: Symbol, F: RealField, G: RealField) -> np.ndarray:
    if not base.info.separable or not hasattr(base, "separable_terms"):
        raise BilinearError(f"Symbol '{base.name}' has no separable form", "separable")
    try:
        terms = base.separable_terms(F.grid.dim)
    except SymbolError as e:
        raise BilinearError(str(e), "separable") from e

    grid = F.grid
    g_hat = to_spectral(G).coeffs
    total = np.zeros(grid.shape, dtype=complex)
    for term in terms:
        derivative = partial_derivative(F, term.f_index).values
        filtered = to_complex_values(SpectralField(grid, g_hat * term.multiplier(grid.frequency_vectors)))
        total += (term.weight * (-1j) ** term.f_index.order) * derivative * filtered
    return total


def bilinear_apply_separable(sym: Symbol, F: RealField, G: RealField) -> RealField:
    """
    Fast evaluation of symbols factoring as sum_alpha c_alpha xi^alpha mu_alpha(eta).

    Supports every symbol declaring `separable` in its info (built in:
    ThetaDeriv(s, 0, m), EtaDeriv(s, 0, alpha), ShiftedRiesz(s, 0)), optionally
    wrapped in the low-high localization, which is applied as sum_k B(P_{<=k-3} F, P_k G).

    Raises:
        BilinearError: For symbols without a separable form.
    """
    _check_pair(F, G, "separable")
    base, family = _unlocalized(sym)
    if family is None:
        return RealField(F.grid, np.real(_separable_values(base, F, G)))

    _check_family(F, family, "separable")
    total = np.zeros(F.grid.shape, dtype=complex)
    for k in family.bands:
        total += _separable_values(base, project_leq(F, family, k - 3), project(G, family, k))
    return RealField(F.grid, np.real(total))


@dataclass(frozen=True)
class Decomposition:
    """The three paraproduct pieces of B(F, G) and the reconstruction residual."""

    low_high: RealField
    diagonal: RealField
    high_low: RealField
    residual: float

    def total(self) -> RealField:
        return self.low_high + self.diagonal + self.high_low

    @property
    def band_limited(self) -> bool:
        return self.residual <= DECOMPOSITION_TOLERANCE


def _relative_gap(approximation: RealField, reference: RealField) -> float:
    scale = max(reference.max_abs(), np.finfo(float).tiny)
    return (approximation - reference).max_abs() / scale


def decompose(sym: Symbol, F: RealField, G: RealField, fam: LPFamily) -> Decomposition:
    """
    Split B(F, G) into low-high, diagonal and high-low paraproducts.

        low_high = sum_k B(P_{<=k-3} F, P_k G)
        diagonal = sum_j sum_{|k-j| <= 2} B(P_j F, P_k G)
        high_low = sum_j B(P_j F, P_{<=j-3} G)

    Each piece is one direct sum with the localized symbol. The residual is
    the relative gap between their sum and the unlocalized direct sum; it
    exceeds the tolerance when F or G has energy outside the family bands.
    """
    _check_pair(F, G, "decompose")
    _check_family(F, fam, "decompose")
    pieces = [
        bilinear_apply_direct(wrapper(sym, fam), F, G)
        for wrapper in (LowHighLocalized, DiagonalLocalized, HighLowLocalized)
    ]
    reference = bilinear_apply_direct(sym, F, G)
    residual = _relative_gap(pieces[0] + pieces[1] + pieces[2], reference)
    if residual > DECOMPOSITION_TOLERANCE:
        logger.info("Decomposition residual %.3e: inputs are not band-limited", residual)
    return Decomposition(pieces[0], pieces[1], pieces[2], residual)


def remainder_symbol_apply(
    s: float,
    ell: int,
    F: RealField,
    G: RealField,
    fam: LPFamily,
    quad_order: int = DEFAULT_QUAD_ORDER,
) -> RealField:
    """
    Apply the order-l Taylor remainder of the low-high paraproduct.

    Evaluates (-i)^l sum_{|alpha|=l} T^alpha(d^alpha F, D^(s-l) G) with the
    low-high localized kernel t^alpha. The result equals
    B_low_high(F, G) - sum_{m<l} A^m_{s, low_high}(0)(F, G) up to quadrature error.

    Raises:
        BilinearError: If l is outside {1, 2, 3} or s < 0.
    """
    if ell not in (1, 2, 3):
        raise BilinearError(f"Remainder order must be 1, 2 or 3, got {ell}", "remainder")
    if s < 0:
        raise BilinearError(f"Remainder needs s >= 0, got {s}", "remainder")
    _check_pair(F, G, "remainder")
    _check_family(F, fam, "remainder")

    grid = F.grid
    shifted = riesz_potential(G, s - ell)
    symbol_class = remainder_symbol_class(ell)
    total = np.zeros(grid.shape, dtype=complex)
    for alpha in MultiIndex.of_order(grid.dim, ell):
        kernel = LowHighLocalized(symbol_class(s, alpha.entries, quad_order), fam)
        total += bilinear_direct_sum(kernel, partial_derivative(F, alpha), shifted).spectrum.coeffs
    values = to_complex_values(SpectralField(grid, total)) * (-1j) ** ell
    return RealField(grid, np.real(values))


def taylor_correction_lowhigh(
    s: float,
    ell: int,
    F: RealField,
    G: RealField,
    fam: LPFamily,
    coefficient: str = "multinomial",
) -> RealField:
    """sum_k sum_{m<l} A^m_s(0)(P_{<=k-3} F, P_k G) through the separable path."""
    total = RealField.zeros(F.grid)
    for m in range(ell):
        symbol = LowHighLocalized(ThetaDeriv(s, 0.0, m, coefficient), fam)
        total = total + bilinear_apply_separable(symbol, F, G)
    return total


def lowhigh_derivative_form(
    s1: float,
    s2: float,
    alpha: MultiIndex | Sequence[int] | int,
    f: RealField,
    g: RealField,
    fam: LPFamily,
) -> RealField:
    """sum_k D^{s1}(d^alpha P_{<=k-3} f * D^{s2} P_k g)."""
    _check_pair(f, g, "lowhigh-form")
    _check_family(f, fam, "lowhigh-form")
    index = MultiIndex.coerce(alpha, f.grid.dim)
    total = RealField.zeros(f.grid)
    for k in fam.bands:
        low = partial_derivative(project_leq(f, fam, k - 3), index)
        high = riesz_potential(project(g, fam, k), s2)
        total = total + low * high
    return riesz_potential(total, s1)


def diagonal_paraproduct(
    s1: float, s2: float, s3: float, f: RealField, g: RealField, fam: LPFamily
) -> RealField:
    """
    D^{s1} sum_j (P_j D^{s2} f)(P_j D^{s3} g) over the family bands.

    Raises:
        BilinearError: If any order is negative.
    """
    if min(s1, s2, s3) < 0:
        raise BilinearError("Diagonal paraproduct orders must be non-negative", "diagonal")
    _check_pair(f, g, "diagonal")
    _check_family(f, fam, "diagonal")
    f_s = riesz_potential(f, s2)
    g_s = riesz_potential(g, s3)
    total = RealField.zeros(f.grid)
    for j in fam.bands:
        total = total + project(f_s, fam, j) * project(g_s, fam, j)
    return riesz_potential(total, s1)


@dataclass(frozen=True, eq=False)
class ConeSample:
    """
    Frequency pairs inside the cone 0 < |xi| <= |eta|/2 and a theta grid.

    Attributes:
        xi: First frequencies, shape (P, dim).
        eta: Second frequencies, shape (P, dim).
        scales: Dyadic scale label t of each pair, |eta| = 2^t.
        thetas: theta values in [0, 1].
    """

    xi: np.ndarray
    eta: np.ndarray
    scales: np.ndarray
    thetas: tuple[float, ...]

    def __post_init__(self) -> None:
        xi_norm = np.sqrt(np.sum(self.xi**2, axis=-1))
        eta_norm = np.sqrt(np.sum(self.eta**2, axis=-1))
        if not np.all((xi_norm > 0) & (xi_norm <= eta_norm / 2 * (1 + 1e-12))):
            raise BilinearError("Cone sample pairs must satisfy 0 < |xi| <= |eta|/2", "cone")
        if any(not 0.0 <= t <= 1.0 for t in self.thetas):
            raise BilinearError("Cone sample thetas must lie in [0, 1]", "cone")

    @property
    def dim(self) -> int:
        return self.xi.shape[-1]

    @classmethod
    def default(
        cls,
        dim: int = 1,
        scales: Sequence[int] = range(-20, 20),
        ratios: int = 16,
        thetas: int = 17,
        angles: int = 8,
    ) -> ConeSample:
        """
        The deterministic sample: |eta| = 2^t per scale, |xi|/|eta| = i/32 for
        i = 1..ratios, theta = k/(thetas-1). In 1D xi takes both signs; in 2D
        eta and xi each take `angles` directions.
        """
        fractions = np.arange(1, ratios + 1) / (2.0 * ratios)
        if dim == 1:
            eta_dirs = np.array([[1.0]])
            xi_dirs = np.array([[1.0], [-1.0]])
        else:
            phases = 2 * math.pi * np.arange(angles) / angles
            eta_dirs = np.stack([np.cos(phases), np.sin(phases)], axis=-1)
            xi_dirs = eta_dirs

        xi_list, eta_list, labels = [], [], []
        for t in scales:
            magnitude = 2.0**t
            for eta_dir in eta_dirs:
                for fraction in fractions:
                    for xi_dir in xi_dirs:
                        eta_list.append(magnitude * eta_dir)
                        xi_list.append(fraction * magnitude * xi_dir)
                        labels.append(t)
        theta_values = tuple(k / (thetas - 1) for k in range(thetas))
        return cls(np.array(xi_list), np.array(eta_list), np.array(labels), theta_values)


@dataclass(frozen=True)
class ConeBound:
    """Normalized sup Q(alpha, beta) of one symbol derivative over a cone sample."""

    s: float
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    q: float
    per_scale: tuple[float, ...]

    @property
    def spread(self) -> float:
        """(max - min)/max of the per-scale values; 0 when all vanish."""
        high = max(self.per_scale)
        if high == 0:
            return 0.0
        return (high - min(self.per_scale)) / high

    @property
    def finite(self) -> bool:
        return all(math.isfinite(v) for v in self.per_scale)

    def to_dict(self) -> dict[str, Any]:
        return {
            "s": self.s,
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "Q": self.q,
            "spread": self.spread,
            "per_scale": list(self.per_scale),
        }


def symbol_cone_bounds(
    s: float,
    orders: Sequence[tuple[Sequence[int] | int, Sequence[int] | int]],
    sample: ConeSample,
) -> list[ConeBound]:
    """
    Scan d_xi^alpha d_eta^beta a_s over the cone.

    Uses the closed form theta^|alpha| (d^(alpha+beta) |.|^s)(eta + theta xi)
    and normalizes each value by |eta|^(|alpha|+|beta|-s).

    Raises:
        BilinearError: If some |alpha| + |beta| exceeds 4.
    """
    eta_norm = np.sqrt(np.sum(sample.eta**2, axis=-1))
    labels = np.unique(sample.scales)
    bounds = []
    for alpha_spec, beta_spec in orders:
        try:
            alpha = MultiIndex.coerce(alpha_spec, sample.dim)
            beta = MultiIndex.coerce(beta_spec, sample.dim)
            combined = alpha + beta
        except Exception as e:
            raise BilinearError(f"Invalid derivative order: {e}", "cone") from e

        normalization = eta_norm ** (combined.order - s)
        best = np.zeros(len(eta_norm))
        for theta in sample.thetas:
            values, _ = norm_power_derivative(sample.eta + theta * sample.xi, s, combined)
            best = np.maximum(best, np.abs(theta**alpha.order * values) * normalization)

        per_scale = tuple(float(np.max(best[sample.scales == t])) for t in labels)
        bounds.append(ConeBound(s, alpha.entries, beta.entries, max(per_scale), per_scale))
        logger.debug("Cone bound s=%g alpha=%s beta=%s: Q=%g", s, alpha.entries, beta.entries, max(per_scale))
    return bounds
