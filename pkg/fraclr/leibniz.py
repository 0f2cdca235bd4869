"""
Fractional Leibniz remainders, commutators and estimate kinds for fraclr.

Every remainder here is a field built from fraclr.spectral and
fraclr.bilinear. An estimate kind turns a remainder into a numerical witness
of an inequality

    ||LHS(f, g)||_{L^p} <= C ||D^{s1} f||_{L^{p1}} ||D^{s2} g||_{L^{p2}}

by reporting both sides and their ratio.

Usage:
    from fraclr.leibniz import EstimateSpec, estimate_report

    spec = EstimateSpec(s=1.5, s1=1.0, s2=0.5, p=2, p1=4, p2=4)
    report = estimate_report("kpv_cor1", f, g, fam, spec)
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from typing import Any, ClassVar

from .bilinear import (
    bilinear_apply_direct,
    bilinear_apply_separable,
    diagonal_paraproduct,
    lowhigh_derivative_form,
    remainder_symbol_apply,
    taylor_correction_lowhigh,
)
from .littlewood_paley import LPFamily, project, project_leq
from .spectral import (
    MultiIndex,
    RealField,
    dot_gradients,
    gradient,
    lp_norm,
    riesz_potential,
)
from .symbols.localized import LowHighLocalized
from .symbols.riesz import GradientCorrectedRemainder, KpvRemainder, ThetaDeriv

logger = logging.getLogger(__name__)

HOLDER_TOLERANCE = 1e-12
# Absolute size below which a left-hand side counts as zero when the right-hand side vanishes.
ZERO_LHS_TOLERANCE = 1e-12


class EstimateError(Exception):
    """Exception raised for invalid estimate parameters or kind mismatches."""

    def __init__(self, message: str, kind: str | None = None, parameter: str | None = None):
        self.message = message
        self.kind = kind
        self.parameter = parameter
        super().__init__(message)

    def __str__(self) -> str:
        parts = [self.message]
        if self.kind:
            parts.insert(0, f"[{self.kind}]")
        if self.parameter:
            parts.append(f"(parameter: {self.parameter})")
        return " ".join(parts)


@dataclass(frozen=True)
class EstimateSpec:
    """
    Exponents of one estimate instance.

    Attributes:
        s: Total order, s >= 0.
        s1, s2: Split of s onto f and g, s1 + s2 = s.
        p, p1, p2: Lebesgue exponents in (1, inf) with 1/p = 1/p1 + 1/p2.
        ell: Correction order; defaults to max(1, ceil(s)).
    """

    s: float
    s1: float
    s2: float
    p: float
    p1: float
    p2: float
    ell: int | None = None

    def __post_init__(self) -> None:
        if self.s < 0 or self.s1 < 0 or self.s2 < 0:
            raise EstimateError("Orders s, s1, s2 must be non-negative", parameter="s")
        if abs(self.s1 + self.s2 - self.s) > HOLDER_TOLERANCE * max(1.0, self.s):
            raise EstimateError(
                f"s1 + s2 = {self.s1 + self.s2} does not equal s = {self.s}", parameter="s1"
            )
        for name in ("p", "p1", "p2"):
            value = getattr(self, name)
            if not 1 < value < math.inf:
                raise EstimateError(f"{name} = {value} must lie in (1, inf)", parameter=name)
        if abs(1 / self.p - 1 / self.p1 - 1 / self.p2) > HOLDER_TOLERANCE:
            raise EstimateError(
                f"Holder scaling 1/p = 1/p1 + 1/p2 fails for ({self.p}, {self.p1}, {self.p2})",
                parameter="p",
            )
        if self.ell is not None and self.ell < 1:
            raise EstimateError("Correction order ell must be a positive integer", parameter="ell")

    @property
    def order(self) -> int:
        if self.ell is not None:
            return self.ell
        return max(1, math.ceil(self.s))

    def validate(self, kind: str) -> None:
        """Check the parameter ranges of an estimate kind."""
        EstimateKindRegistry.get(kind).validate(self)

    def to_dict(self) -> dict[str, Any]:
        values = asdict(self)
        values["ell"] = self.order
        return values


def _check_pair(f: RealField, g: RealField) -> None:
    if f.grid != g.grid:
        raise EstimateError("Fields live on different grids", parameter="grid")


def correction_kpv(f: RealField, g: RealField, s: float) -> RealField:
    """Cor_s(f, g) = f D^s g + g D^s f."""
    _check_pair(f, g)
    return f * riesz_potential(g, s) + g * riesz_potential(f, s)


def remainder_kpv(f: RealField, g: RealField, s: float) -> RealField:
    """D^s(fg) - f D^s g - g D^s f."""
    return riesz_potential(f * g, s) - correction_kpv(f, g, s)


def remainder_second_order(f: RealField, g: RealField, s: float) -> RealField:
    """
    D^s(fg) - f D^s g - g D^s f + s D^(s-2)(grad f . grad g).

    Raises:
        EstimateError: If s < 2.
    """
    if s < 2:
        raise EstimateError(f"Second-order remainder needs s >= 2, got {s}", parameter="s")
    return remainder_kpv(f, g, s) + s * riesz_potential(dot_gradients(f, g), s - 2)


def commutator(f: RealField, g: RealField, s: float) -> RealField:
    """[D^s, f] g = D^s(fg) - f D^s g."""
    _check_pair(f, g)
    return riesz_potential(f * g, s) - f * riesz_potential(g, s)


def first_correction(f: RealField, g: RealField, s: float) -> RealField:
    """A^1_s(0)(f, g), the operator with symbol s |eta|^(s-2) xi . eta."""
    return bilinear_apply_separable(ThetaDeriv(s, 0.0, 1), f, g)


def commutator_first_correction(f: RealField, g: RealField, s: float) -> RealField:
    """[D^s, f] g - A^1_s(0)(f, g)."""
    return commutator(f, g, s) - first_correction(f, g, s)


def _check_theorem_range(s: float, ell: int) -> None:
    if not ell - 1 <= s <= ell:
        raise EstimateError(f"Need ell - 1 <= s <= ell, got s={s}, ell={ell}", "thm11", "ell")


def theorem11_remainder(f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec) -> RealField:
    """
    D^s(fg) minus the symmetrized low-high Taylor corrections of order < l:

        sum_k sum_{m<l} A^m_s(0)(P_{<=k-3} f, P_k g) + (f <-> g)

    Raises:
        EstimateError: If l - 1 <= s <= l fails.
    """
    _check_pair(f, g)
    _check_theorem_range(spec.s, spec.order)
    corrections = taylor_correction_lowhigh(spec.s, spec.order, f, g, fam)
    corrections = corrections + taylor_correction_lowhigh(spec.s, spec.order, g, f, fam)
    return riesz_potential(f * g, spec.s) - corrections


@dataclass(frozen=True)
class ParaproductPieces:
    """Pieces of a low-high remainder and their gap to the direct localized sum."""

    pieces: tuple[RealField, ...]
    reference: RealField
    residual: float

    def total(self) -> RealField:
        total = self.pieces[0]
        for piece in self.pieces[1:]:
            total = total + piece
        return total


def _pieces(pieces: list[RealField], reference: RealField) -> ParaproductPieces:
    """The residual is relative to the larger of the reference and the pieces, so a
    vanishing reference (s = 2 for the gradient-corrected symbol) measures cancellation."""
    total = pieces[0]
    for piece in pieces[1:]:
        total = total + piece
    scale = max(reference.max_abs(), sum(piece.max_abs() for piece in pieces), 1e-300)
    return ParaproductPieces(tuple(pieces), reference, (total - reference).max_abs() / scale)


def _low_times_high(f: RealField, g: RealField, s: float, fam: LPFamily) -> RealField:
    """sum_k P_k g * D^s P_{<=k-3} f"""
    total = RealField.zeros(f.grid)
    for k in fam.bands:
        total = total + project(g, fam, k) * riesz_potential(project_leq(f, fam, k - 3), s)
    return total


def corollary11_pieces(f: RealField, g: RealField, s: float, fam: LPFamily) -> ParaproductPieces:
    """
    Low-high part of D^s(fg) - f D^s g - g D^s f as B^I + B^II.

    B^I is the first-order Taylor remainder, B^II = -sum_k P_k g D^s P_{<=k-3} f.
    The reference is the direct sum of the localized symbol
    |xi + eta|^s - |eta|^s - |xi|^s.
    """
    _check_pair(f, g)
    first = remainder_symbol_apply(s, 1, f, g, fam)
    second = -_low_times_high(f, g, s, fam)
    reference = bilinear_apply_direct(LowHighLocalized(KpvRemainder(s), fam), f, g)
    return _pieces([first, second], reference)


def corollary12_pieces(f: RealField, g: RealField, s: float, fam: LPFamily) -> ParaproductPieces:
    """
    Low-high part of the gradient-corrected remainder as B^I + B^II + B^III.

        B^I   = second-order Taylor remainder of |eta + theta xi|^s
        B^II  = s sum_m R^(s-2)(d_m f, d_m g), R^(s-2) the first-order remainder for s - 2
        B^III = -sum_k P_k g D^s P_{<=k-3} f

    Raises:
        EstimateError: If s < 2.
    """
    if s < 2:
        raise EstimateError(f"Second-order pieces need s >= 2, got {s}", parameter="s")
    _check_pair(f, g)
    first = remainder_symbol_apply(s, 2, f, g, fam)
    second = RealField.zeros(f.grid)
    for df, dg in zip(gradient(f), gradient(g), strict=True):
        second = second + s * remainder_symbol_apply(s - 2, 1, df, dg, fam)
    third = -_low_times_high(f, g, s, fam)
    reference = bilinear_apply_direct(LowHighLocalized(GradientCorrectedRemainder(s), fam), f, g)
    return _pieces([first, second, third], reference)


@dataclass
class KindInfo:
    """Metadata about an estimate kind."""

    name: str
    description: str
    statement: str = ""
    localized_only: bool = False


@dataclass(frozen=True)
class EstimateReport:
    """Both sides of one estimate instance and their ratio."""

    kind: str
    spec: EstimateSpec
    lhs: float
    rhs: float
    ratio: float
    family_label: str = ""
    family_params: dict[str, Any] = field(default_factory=dict)
    hard_failure: bool = False

    @property
    def finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.lhs, self.rhs, self.ratio))


class EstimateKind(ABC):
    """
    Base class for estimate kinds.

    A kind supplies its parameter constraints and the left-hand side field;
    the right-hand side defaults to ||D^{s1} f||_{p1} ||D^{s2} g||_{p2}.
    """

    info: ClassVar[KindInfo]

    def validate(self, spec: EstimateSpec) -> None:
        """Raise EstimateError if spec is outside the kind's parameter range."""

    @abstractmethod
    def lhs_field(self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec) -> RealField:
        ...

    def lhs(self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec) -> float:
        return lp_norm(self.lhs_field(f, g, fam, spec), spec.p)

    def rhs(self, f: RealField, g: RealField, spec: EstimateSpec) -> float:
        return lp_norm(riesz_potential(f, spec.s1), spec.p1) * lp_norm(
            riesz_potential(g, spec.s2), spec.p2
        )

    def _require(self, condition: bool, message: str, parameter: str) -> None:
        if not condition:
            raise EstimateError(message, self.info.name, parameter)


class BilinearLeibniz(EstimateKind):
    info = KindInfo(
        name="eq11",
        description="||D^s(fg)||_p against ||D^s f||_p1 ||g||_p2 + ||f||_p1 ||D^s g||_p2",
    )

    def validate(self, spec: EstimateSpec) -> None:
        self._require(spec.s2 == 0, "The two-term bound uses the split (s, 0)", "s2")

    def lhs_field(
        self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec
    ) -> RealField:
        return riesz_potential(f * g, spec.s)

    def rhs(self, f: RealField, g: RealField, spec: EstimateSpec) -> float:
        return lp_norm(riesz_potential(f, spec.s), spec.p1) * lp_norm(g, spec.p2) + lp_norm(
            f, spec.p1
        ) * lp_norm(riesz_potential(g, spec.s), spec.p2)


class KpvRedistribution(EstimateKind):
    info = KindInfo(
        name="kpv_cor1",
        description="||D^s(fg) - f D^s g - g D^s f||_p with 0 <= s1, s2 <= 1",
    )

    def validate(self, spec: EstimateSpec) -> None:
        self._require(spec.s1 <= 1 and spec.s2 <= 1, "Needs s1, s2 <= 1", "s1")

    def lhs_field(
        self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec
    ) -> RealField:
        return remainder_kpv(f, g, spec.s)


class SecondOrderRedistribution(EstimateKind):
    info = KindInfo(
        name="cor2",
        description="Gradient-corrected remainder with s >= 2 and s1, s2 <= 2",
    )

    def validate(self, spec: EstimateSpec) -> None:
        self._require(spec.s >= 2, "Needs s >= 2", "s")
        self._require(spec.s1 <= 2 and spec.s2 <= 2, "Needs s1, s2 <= 2", "s1")

    def lhs_field(
        self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec
    ) -> RealField:
        return remainder_second_order(f, g, spec.s)


class GeneralCorrection(EstimateKind):
    info = KindInfo(
        name="thm11",
        description="D^s(fg) minus symmetrized low-high corrections of order < l, l-1 <= s <= l",
    )

    def validate(self, spec: EstimateSpec) -> None:
        self._require(spec.order - 1 <= spec.s <= spec.order, "Needs l - 1 <= s <= l", "ell")

    def lhs_field(
        self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec
    ) -> RealField:
        return theorem11_remainder(f, g, fam, spec)


class LocalizedCommutator(EstimateKind):
    info = KindInfo(
        name="lemma11_commutator",
        description="||[D^s, f] g||_p for frequency-localized pairs, s1 <= 1",
        localized_only=True,
    )

    def validate(self, spec: EstimateSpec) -> None:
        self._require(spec.s1 <= 1, "Needs s1 <= 1", "s1")

    def lhs_field(
        self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec
    ) -> RealField:
        return commutator(f, g, spec.s)


class FirstCorrectedCommutator(EstimateKind):
    info = KindInfo(
        name="eq19_commutator",
        description="||[D^s, f] g - A^1_s(0)(f, g)||_p for localized pairs, s1 <= 2",
        localized_only=True,
    )

    def validate(self, spec: EstimateSpec) -> None:
        self._require(spec.s1 <= 2, "Needs s1 <= 2", "s1")

    def lhs_field(
        self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec
    ) -> RealField:
        return commutator_first_correction(f, g, spec.s)


class DiagonalEstimate(EstimateKind):
    info = KindInfo(
        name="lemma25_diagonal",
        description="||D^s sum_j P_j f P_j g||_p",
    )

    def lhs_field(
        self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec
    ) -> RealField:
        return diagonal_paraproduct(spec.s, 0.0, 0.0, f, g, fam)


class LowHighEstimate(EstimateKind):
    info = KindInfo(
        name="lemma32_lowhigh",
        description="sum_{|alpha|=l} ||sum_k d^alpha P_{<=k-3} f D^(s-l) P_k g||_p, s1 <= l",
    )

    def validate(self, spec: EstimateSpec) -> None:
        self._require(spec.s1 <= spec.order, "Needs s1 <= l", "s1")

    def lhs_field(
        self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec
    ) -> RealField:
        alpha = MultiIndex.of_order(f.grid.dim, spec.order)[0]
        return lowhigh_derivative_form(0.0, spec.s - spec.order, alpha, f, g, fam)

    def lhs(self, f: RealField, g: RealField, fam: LPFamily, spec: EstimateSpec) -> float:
        return sum(
            lp_norm(lowhigh_derivative_form(0.0, spec.s - spec.order, alpha, f, g, fam), spec.p)
            for alpha in MultiIndex.of_order(f.grid.dim, spec.order)
        )


class EstimateKindRegistry:
    """Registry of estimate kinds, keyed by KindInfo.name."""

    _kinds: dict[str, EstimateKind] = {}

    @classmethod
    def register(cls, kind_class: type[EstimateKind], name: str | None = None) -> None:
        """
        Register an estimate kind.

        Raises:
            ValueError: If the class is missing its KindInfo
            KeyError: If a kind with the same name is already registered
        """
        if not isinstance(getattr(kind_class, "info", None), KindInfo):
            raise ValueError(f"Estimate kind {kind_class.__name__} must have a KindInfo attribute")
        kind_name = name or kind_class.info.name
        if kind_name in cls._kinds:
            raise KeyError(f"Estimate kind '{kind_name}' is already registered")
        cls._kinds[kind_name] = kind_class()

    @classmethod
    def get(cls, name: str) -> EstimateKind:
        if name not in cls._kinds:
            available = ", ".join(sorted(cls._kinds))
            raise EstimateError(f"Unknown estimate kind. Available kinds: {available}", name)
        return cls._kinds[name]

    @classmethod
    def list_kinds(cls) -> list[KindInfo]:
        return [kind.info for kind in cls._kinds.values()]

    @classmethod
    def is_registered(cls, name: str) -> bool:
        return name in cls._kinds

    @classmethod
    def clear(cls) -> None:
        cls._kinds.clear()


BUILT_IN_KINDS = (
    BilinearLeibniz,
    KpvRedistribution,
    SecondOrderRedistribution,
    GeneralCorrection,
    LocalizedCommutator,
    FirstCorrectedCommutator,
    DiagonalEstimate,
    LowHighEstimate,
)


def register_built_in_kinds() -> None:
    """Register the built-in estimate kinds; names already present are skipped."""
    for kind_class in BUILT_IN_KINDS:
        if not EstimateKindRegistry.is_registered(kind_class.info.name):
            EstimateKindRegistry.register(kind_class)


register_built_in_kinds()


def estimate_report(
    kind: str,
    f: RealField,
    g: RealField,
    fam: LPFamily,
    spec: EstimateSpec,
    family_label: str = "",
    family_params: dict[str, Any] | None = None,
) -> EstimateReport:
    """
    Compute both sides of an estimate and their ratio.

    The ratio is 0 when both sides vanish. A vanishing right-hand side with a
    non-zero left-hand side is reported as a hard failure with an infinite ratio.

    Raises:
        EstimateError: If the kind is unknown or spec is outside its range.
    """
    _check_pair(f, g)
    estimate = EstimateKindRegistry.get(kind)
    estimate.validate(spec)

    lhs = estimate.lhs(f, g, fam, spec)
    rhs = estimate.rhs(f, g, spec)
    hard_failure = False
    if rhs > 0:
        ratio = lhs / rhs
    elif lhs <= ZERO_LHS_TOLERANCE:
        ratio = 0.0
    else:
        ratio = math.inf
        hard_failure = True
        logger.warning("%s: right-hand side vanishes with lhs=%g", kind, lhs)

    return EstimateReport(
        kind=kind,
        spec=spec,
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        family_label=family_label,
        family_params=dict(family_params or {}),
        hard_failure=hard_failure,
    )
