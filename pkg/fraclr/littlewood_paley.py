"""
Smooth dyadic partition of unity and Littlewood-Paley projections.

The partition is built from the radial step

    S(r) = 1 (r <= 1),  h(2 - r) (1 < r < 2),  0 (r >= 2)

with h(t) = psi(t) / (psi(t) + psi(1 - t)) and psi(t) = exp(-1/t) for t > 0.
Then Psi_hat_j(xi) = S(2^-j |xi|) and Phi_hat_j = Psi_hat_j - Psi_hat_{j-1},
so the bands telescope to an exact partition of unity.

Usage:
    from fraclr.littlewood_paley import build_family, project

    fam = build_family(grid, j_min=0, j_max=6)
    band = project(f, fam, 3)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    GridSpec,
    RealField,
    SpectralField,
    apply_multiplier,
    lp_norm,
    lq_aggregate,
    maximal_function,
    riesz_multiplier,
    to_real,
    to_spectral,
)

logger = logging.getLogger(__name__)

TRANSITION_PROFILES = ("exp-bump",)

# Table margins around [j_min, j_max]: widened projections reach j +- 2 and
# the low-high paraproduct needs P_{<=j_min-3}.
_PHI_MARGIN = 2
_PSI_MARGIN_LOW = 3


class FamilyError(Exception):
    """Exception raised for invalid Littlewood-Paley families or band indices."""

    def __init__(self, message: str, parameter: str | None = None, value: object = None) -> None:
        self.message = message
        self.parameter = parameter
        self.value = value
        super().__init__(message)

    def __str__(self) -> str:
        if self.parameter is None:
            return self.message
        return f"{self.message} ({self.parameter}={self.value!r})"


def _exp_bump(t: np.ndarray) -> np.ndarray:
    positive = t > 0
    return np.where(positive, np.exp(-1.0 / np.where(positive, t, 1.0)), 0.0)


def transition(t: np.ndarray) -> np.ndarray:
    """The smooth step h(t): 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    rising = _exp_bump(t)
    return rising / (rising + _exp_bump(1.0 - t))


def smooth_step(r: np.ndarray) -> np.ndarray:
    """The radial cutoff S(r): 1 on [0, 1], 0 on [2, inf), smooth and non-increasing."""
    r = np.asarray(r, dtype=float)
    return np.where(r <= 1, 1.0, np.where(r >= 2, 0.0, transition(2.0 - r)))


def phi_hat(norm: np.ndarray) -> np.ndarray:
    """Mother band Phi_hat(xi) = S(|xi|) - S(2|xi|), supported in 1/2 < |xi| < 2."""
    return smooth_step(norm) - smooth_step(2.0 * np.asarray(norm, dtype=float))


@dataclass(frozen=True, eq=False)
class LPFamily:
    """
    A finite Littlewood-Paley family on a grid.

    Attributes:
        grid: Grid the multiplier tables are evaluated on.
        j_min: Lowest projected band.
        j_max: Highest projected band; 2^{j_max+1} must not exceed the Nyquist bound.
        transition_profile: Name of the smooth step generating the partition.
    """

    grid: GridSpec
    j_min: int
    j_max: int
    transition_profile: str = "exp-bump"
    _phi_tables: dict[int, np.ndarray] = field(init=False, repr=False)
    _psi_tables: dict[int, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.transition_profile not in TRANSITION_PROFILES:
            raise FamilyError(
                f"Unknown transition profile, expected one of {TRANSITION_PROFILES}",
                "transition_profile",
                self.transition_profile,
            )
        if self.j_min >= self.j_max:
            raise FamilyError("j_min must be below j_max", "j_min", (self.j_min, self.j_max))
        if 2.0 ** (self.j_max + 1) > self.grid.nyquist * (1 + 1e-12):
            limit = math.floor(math.log2(self.grid.nyquist)) - 1
            raise FamilyError(
                f"Band j_max aliases on this grid, largest resolvable band is {limit}",
                "j_max",
                self.j_max,
            )

        object.__setattr__(self, "_phi_tables", {})
        object.__setattr__(self, "_psi_tables", {})
        norm = self.grid.frequency_norm
        for j in range(self.j_min - _PSI_MARGIN_LOW, self.j_max + _PHI_MARGIN + 1):
            table = smooth_step(norm / 2.0**j)
            table.flags.writeable = False
            self._psi_tables[j] = table
        for j in range(self.j_min - _PHI_MARGIN, self.j_max + _PHI_MARGIN + 1):
            table = self._psi_tables[j] - self._psi_tables[j - 1]
            table.flags.writeable = False
            self._phi_tables[j] = table

        logger.debug(
            "Built family on N=%d L=%g with bands [%d, %d]",
            self.grid.points_per_axis,
            self.grid.period,
            self.j_min,
            self.j_max,
        )

    @property
    def bands(self) -> range:
        return range(self.j_min, self.j_max + 1)

    @property
    def low_range(self) -> tuple[int, int]:
        """Index range accepted by project_leq and project_gt."""
        return self.j_min - _PSI_MARGIN_LOW, self.j_max + _PHI_MARGIN

    def phi_multiplier(self, j: int) -> np.ndarray:
        """Phi_hat(2^-j xi) on the grid, for j within two bands of the family."""
        if j not in self._phi_tables:
            raise FamilyError("Band index outside the family tables", "j", j)
        return self._phi_tables[j]

    def psi_multiplier(self, j: int) -> np.ndarray:
        """Psi_hat_j(xi) = S(2^-j |xi|) on the grid."""
        if j not in self._psi_tables:
            raise FamilyError("Low-pass index outside the family tables", "j", j)
        return self._psi_tables[j]

    def widened_multiplier(self, j: int) -> np.ndarray:
        """Phi_tilde_j = sum_{k=-2}^{2} Phi_{j+k}; equals 1 on supp Phi_hat_j."""
        self._check_band(j)
        return self.psi_multiplier(j + 2) - self.psi_multiplier(j - 3)

    def phi_hat_at(self, norm: np.ndarray, j: int) -> np.ndarray:
        """Phi_hat(2^-j xi) at arbitrary frequency magnitudes."""
        return phi_hat(np.asarray(norm, dtype=float) / 2.0**j)

    def psi_hat_at(self, norm: np.ndarray, j: int) -> np.ndarray:
        return smooth_step(np.asarray(norm, dtype=float) / 2.0**j)

    def multiplier_tables(self) -> dict[str, np.ndarray]:
        """Named band tables, for export in the field dump format."""
        tables = {f"phi_{j}": self._phi_tables[j] for j in self.bands}
        tables.update({f"psi_{j}": self._psi_tables[j] for j in self.bands})
        return tables

    def partition_defect(self) -> float:
        """Max |sum_j Phi_hat_j - 1| over frequencies with 2^j_min <= |xi| <= 2^(j_max-1)."""
        norm = self.grid.frequency_norm
        window = (norm >= 2.0**self.j_min) & (norm <= 2.0 ** (self.j_max - 1))
        if not np.any(window):
            return 0.0
        total = sum(self._phi_tables[j] for j in self.bands)
        return float(np.max(np.abs(total[window] - 1.0)))

    def _check_band(self, j: int) -> None:
        if not self.j_min <= j <= self.j_max:
            raise FamilyError(
                f"Band index must lie in [{self.j_min}, {self.j_max}]", "j", j
            )

    def _check_low(self, j: int) -> None:
        low, high = self.low_range
        if not low <= j <= high:
            raise FamilyError(f"Low-pass index must lie in [{low}, {high}]", "j", j)


def build_family(grid: GridSpec, j_min: int, j_max: int) -> LPFamily:
    """
    Build and validate a Littlewood-Paley family.

    Raises:
        FamilyError: If the band range is empty or aliases on the grid.
    """
    return LPFamily(grid, j_min, j_max)


def _check_family(f: RealField, fam: LPFamily) -> None:
    if f.grid != fam.grid:
        raise FamilyError("Field and family live on different grids", "grid", (f.grid, fam.grid))


def project(f: RealField, fam: LPFamily, j: int) -> RealField:
    """P_j f, the band 2^{j-1} < |xi| < 2^{j+1}."""
    _check_family(f, fam)
    fam._check_band(j)
    return apply_multiplier(f, fam.phi_multiplier(j))


def project_leq(f: RealField, fam: LPFamily, j: int) -> RealField:
    """P_{<=j} f with multiplier Psi_hat_j."""
    _check_family(f, fam)
    fam._check_low(j)
    return apply_multiplier(f, fam.psi_multiplier(j))


def project_gt(f: RealField, fam: LPFamily, j: int) -> RealField:
    """P_{>j} f with multiplier 1 - Psi_hat_j."""
    _check_family(f, fam)
    fam._check_low(j)
    return apply_multiplier(f, 1.0 - fam.psi_multiplier(j))


def project_widened(f: RealField, fam: LPFamily, j: int) -> RealField:
    _check_family(f, fam)
    return apply_multiplier(f, fam.widened_multiplier(j))


@dataclass(frozen=True)
class BandDecomposition:
    """The pieces P_j f for j in the family range and the low remainder P_{<=j_min-1} f."""

    pieces: dict[int, RealField]
    residual_low: RealField

    def reconstruct(self) -> RealField:
        total = self.residual_low
        for j in sorted(self.pieces):
            total = total + self.pieces[j]
        return total


def decompose_bands(f: RealField, fam: LPFamily) -> BandDecomposition:
    """Split f into Littlewood-Paley bands over the family range."""
    _check_family(f, fam)
    spectrum = to_spectral(f)
    pieces = {
        j: to_real(SpectralField(f.grid, spectrum.coeffs * fam.phi_multiplier(j)))
        for j in fam.bands
    }
    residual = to_real(SpectralField(f.grid, spectrum.coeffs * fam.psi_multiplier(fam.j_min - 1)))
    return BandDecomposition(pieces, residual)


def triebel_lizorkin_norm(f: RealField, fam: LPFamily, s: float, p: float, q: float) -> float:
    """
    Homogeneous Triebel-Lizorkin norm || (2^{sj} P_j f)_j ||_{L^p(l^q)}.

    Args:
        f: Input field.
        fam: Family whose bands [j_min, j_max] are summed.
        s: Smoothness index.
        p: Lebesgue exponent, 1 < p < infinity.
        q: Sequence exponent, 1 <= q <= infinity.

    Raises:
        FamilyError: If p or q is out of range.
    """
    if not 1 < p < math.inf:
        raise FamilyError("Exponent p must satisfy 1 < p < infinity", "p", p)
    if not (q >= 1):
        raise FamilyError("Exponent q must satisfy 1 <= q <= infinity", "q", q)
    decomposition = decompose_bands(f, fam)
    stack = np.stack([2.0 ** (s * j) * decomposition.pieces[j].values for j in fam.bands])
    return lp_norm(RealField(f.grid, lq_aggregate(stack, q)), p)


def square_function_ratio(f: RealField, fam: LPFamily, p: float) -> float:
    """||f||_{F^0_{p,2}} / ||f||_{L^p}; bounded above and below by mu(p)."""
    denominator = lp_norm(f, p)
    if denominator == 0:
        raise FamilyError("Square-function ratio of the zero field is undefined", "f", 0.0)
    return triebel_lizorkin_norm(f, fam, 0.0, p, 2.0) / denominator


def mu(p: float) -> float:
    """mu(p) = max(p, 1/(p - 1))."""
    return max(p, 1.0 / (p - 1.0))


@dataclass(frozen=True)
class Lemma22Report:
    """Outcome of the pointwise maximal-function bound for D^s P_{<=k}."""

    s: float
    k: int
    c_num: float
    max_ratio: float
    violations: int
    remark_bound: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.remark_holds

    @property
    def remark_holds(self) -> bool:
        return self.c_num <= self.remark_bound * (1 + self.tolerance)

    def to_dict(self) -> dict[str, float | int | bool]:
        return {
            "s": self.s,
            "k": self.k,
            "c_num": self.c_num,
            "max_ratio": self.max_ratio,
            "violations": self.violations,
            "remark_bound": self.remark_bound,
            "remark_holds": self.remark_holds,
            "tolerance": self.tolerance,
        }


def _kernel(fam: LPFamily, multiplier: np.ndarray) -> SpectralField:
    """Spectrum of the real-space kernel whose continuum transform is `multiplier`."""
    return SpectralField(fam.grid, multiplier / fam.grid.volume)


def lemma22_bound_check(
    f: RealField, fam: LPFamily, s: float, k: int, tolerance: float = 1e-3
) -> Lemma22Report:
    """
    Verify |D^s P_{<=k} f| <= 2^{sk} C_num Mf pointwise.

    C_num = 2^{-sk} || x . grad D^s Psi_k ||_{L^1} is evaluated on the grid with
    the sawtooth coordinate centered at the kernel peak. The report also
    carries the bound C_num <= (dim + s) ||D^s Psi||_1 + ||D^s div(x Psi)||_1,
    both sides rescaled to the working scale k.

    Raises:
        FamilyError: If s < 0 or k is outside the family range.
    """
    if s < 0:
        raise FamilyError("Order s must be non-negative", "s", s)
    _check_family(f, fam)
    fam._check_band(k)
    grid = fam.grid
    scale = 2.0 ** (-s * k)

    riesz = riesz_multiplier(grid, s)
    psi = fam.psi_multiplier(k)
    kernel = _kernel(fam, riesz * psi)
    coordinates = grid.centered_coordinates(0.0)

    # x . grad (D^s Psi_k), gradient taken spectrally
    radial = np.zeros(grid.shape)
    for axis, x in enumerate(coordinates):
        derivative = to_real(SpectralField(grid, kernel.coeffs * 1j * grid.frequencies[axis]))
        radial = radial + x * derivative.values
    c_num = scale * lp_norm(RealField(grid, radial), 1)

    # D^s div(x Psi_k)
    psi_real = to_real(_kernel(fam, psi)).values
    divergence = np.zeros(grid.shape, dtype=complex)
    for axis, x in enumerate(coordinates):
        moment = to_spectral(RealField(grid, x * psi_real)).coeffs
        divergence = divergence + moment * 1j * grid.frequencies[axis]
    divergence_term = lp_norm(to_real(SpectralField(grid, divergence * riesz)), 1)
    remark_bound = scale * ((grid.dim + s) * lp_norm(to_real(kernel), 1) + divergence_term)

    lhs = np.abs(apply_multiplier(f, riesz * psi).values)
    bound = (1.0 / scale) * c_num * maximal_function(f).values
    floor = 1e-14 * max(float(np.max(lhs)), 1.0)
    positive = bound > 0
    ratios = np.where(positive, lhs / np.where(positive, bound, 1.0), np.where(lhs > floor, np.inf, 0.0))
    violations = int(np.count_nonzero(lhs > bound * (1 + tolerance) + floor))

    report = Lemma22Report(
        s=s,
        k=k,
        c_num=c_num,
        max_ratio=float(np.max(ratios)),
        violations=violations,
        remark_bound=remark_bound,
        tolerance=tolerance,
    )
    logger.debug("Maximal bound check s=%g k=%d: %s", s, k, report)
    return report


__all__ = [
    "BandDecomposition",
    "FamilyError",
    "LPFamily",
    "Lemma22Report",
    "build_family",
    "decompose_bands",
    "lemma22_bound_check",
    "mu",
    "phi_hat",
    "project",
    "project_gt",
    "project_leq",
    "project_widened",
    "smooth_step",
    "square_function_ratio",
    "transition",
    "triebel_lizorkin_norm",
]
