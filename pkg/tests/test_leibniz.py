"""
Tests for Leibniz remainders, commutators and estimate kinds.
"""

import math

import numpy as np
import pytest

from fraclr.bilinear import bilinear_apply_direct
from fraclr.families import localized_pair, random_bandlimited
from fraclr.leibniz import (
    EstimateError,
    EstimateKind,
    EstimateKindRegistry,
    EstimateSpec,
    KindInfo,
    commutator,
    commutator_first_correction,
    corollary11_pieces,
    corollary12_pieces,
    estimate_report,
    first_correction,
    register_built_in_kinds,
    remainder_kpv,
    remainder_second_order,
    theorem11_remainder,
)
from fraclr.littlewood_paley import build_family
from fraclr.spectral import GridSpec, RealField, lp_norm, riesz_potential
from fraclr.symbols.riesz import KpvRemainder, ShiftedRiesz, ThetaDeriv


@pytest.fixture
def grid():
    return GridSpec(dim=1, points_per_axis=64, period=2 * math.pi)


@pytest.fixture
def fam(grid):
    return build_family(grid, 0, 4)


@pytest.fixture
def pair(grid, fam):
    return random_bandlimited(grid, fam, 0, 1, 21), random_bandlimited(grid, fam, 2, 4, 22)


def _gap(a, b):
    return (a - b).max_abs() / max(b.max_abs(), 1e-300)


class TestEstimateSpec:
    """Tests for EstimateSpec validation."""

    def test_default_order(self):
        assert EstimateSpec(1.5, 1.0, 0.5, 2, 4, 4).order == 2
        assert EstimateSpec(0.0, 0.0, 0.0, 2, 4, 4).order == 1
        assert EstimateSpec(2.5, 1.0, 1.5, 2, 4, 4, ell=4).order == 4

    def test_split_must_add_up(self):
        with pytest.raises(EstimateError) as exc_info:
            EstimateSpec(1.5, 1.0, 1.0, 2, 4, 4)

        assert exc_info.value.parameter == "s1"

    def test_holder_scaling(self):
        EstimateSpec(1.0, 0.5, 0.5, 2, 6, 3)
        with pytest.raises(EstimateError):
            EstimateSpec(1.0, 0.5, 0.5, 2, 4, 3)

    @pytest.mark.parametrize("p", [1.0, math.inf])
    def test_exponent_range(self, p):
        with pytest.raises(EstimateError):
            EstimateSpec(1.0, 0.5, 0.5, p, 4, 4)

    def test_negative_order(self):
        with pytest.raises(EstimateError):
            EstimateSpec(-1.0, 0.0, -1.0, 2, 4, 4)

    def test_to_dict_fills_ell(self):
        record = EstimateSpec(2.5, 1.0, 1.5, 2, 4, 4).to_dict()
        assert record["ell"] == 3
        assert record["p1"] == 4

    def test_hashable(self):
        assert len({EstimateSpec(1.0, 0.5, 0.5, 2, 4, 4), EstimateSpec(1.0, 0.5, 0.5, 2, 4, 4)}) == 1


class TestRemainders:
    """Tests for the remainder and commutator fields."""

    def test_kpv_remainder_matches_symbol(self, pair):
        f, g = pair
        direct = bilinear_apply_direct(KpvRemainder(1.5), f, g)
        assert _gap(remainder_kpv(f, g, 1.5), direct) < 1e-10

    def test_second_order_vanishes_at_two(self, pair):
        """D^2(fg) - f D^2 g - g D^2 f + 2 grad f . grad g = 0."""
        f, g = pair
        residual = lp_norm(remainder_second_order(f, g, 2.0), 2)
        scale = lp_norm(riesz_potential(f, 1.0), 4) * lp_norm(riesz_potential(g, 1.0), 4)
        assert residual / scale < 1e-10

    def test_second_order_needs_s_two(self, pair):
        f, g = pair
        with pytest.raises(EstimateError):
            remainder_second_order(f, g, 1.5)

    def test_commutator_identity(self, pair):
        f, g = pair
        s = 1.5
        direct = (
            bilinear_apply_direct(ShiftedRiesz(s, 1.0), f, g)
            - bilinear_apply_direct(ShiftedRiesz(s, 0.0), f, g)
            - bilinear_apply_direct(ThetaDeriv(s, 0.0, 1), f, g)
        )
        fast = commutator_first_correction(f, g, s)
        scale = bilinear_apply_direct(ShiftedRiesz(s, 1.0), f, g).max_abs()
        assert (fast - direct).max_abs() / scale < 1e-10

    def test_commutator_of_constant_vanishes(self, grid, pair):
        _, g = pair
        one = RealField.constant(grid, 1.0)
        assert commutator(one, g, 1.5).max_abs() < 1e-12
        assert first_correction(one, g, 1.5).max_abs() < 1e-12

    def test_grid_mismatch(self, pair):
        f, _ = pair
        other = RealField.zeros(GridSpec(dim=1, points_per_axis=32, period=2 * math.pi))
        with pytest.raises(EstimateError):
            commutator(f, other, 1.0)


class TestParaproductPieces:
    """Tests for the low-high reconstructions."""

    @pytest.mark.parametrize("s", [0.5, 1.0, 1.5])
    def test_first_order_pieces(self, pair, fam, s):
        f, g = pair
        assert corollary11_pieces(f, g, s, fam).residual < 1e-8

    @pytest.mark.parametrize("s", [2.0, 2.5, 3.0])
    def test_second_order_pieces(self, pair, fam, s):
        f, g = pair
        pieces = corollary12_pieces(f, g, s, fam)

        assert len(pieces.pieces) == 3
        assert pieces.residual < 1e-8

    def test_second_order_pieces_cancel_at_two(self, pair, fam):
        """At s = 2 the reference vanishes; B^I and B^III cancel each other."""
        f, g = pair
        pieces = corollary12_pieces(f, g, 2.0, fam)
        first, _, third = pieces.pieces

        assert pieces.reference.max_abs() < 1e-8 * first.max_abs()
        assert (first + third).max_abs() < 1e-8 * first.max_abs()
        assert pieces.residual < 1e-8

    def test_second_order_pieces_need_s_two(self, pair, fam):
        f, g = pair
        with pytest.raises(EstimateError):
            corollary12_pieces(f, g, 1.5, fam)


class TestTheoremRemainder:
    """Tests for the symmetrized low-high corrections."""

    def test_range_check(self, pair, fam):
        f, g = pair
        with pytest.raises(EstimateError):
            theorem11_remainder(f, g, fam, EstimateSpec(2.5, 2.5, 0.0, 2, 4, 4, ell=1))

    def test_constant_factor_is_fully_corrected(self, grid, fam):
        """With f constant and g inside the family bands the corrections recover D^s(fg)."""
        f = RealField.constant(grid, 2.0)
        g = random_bandlimited(grid, fam, 0, 4, 23)
        spec = EstimateSpec(1.5, 1.5, 0.0, 2, 4, 4)
        remainder = theorem11_remainder(f, g, fam, spec)
        assert remainder.max_abs() < 1e-12 * riesz_potential(g, 1.5).max_abs()


class TestEstimateKindRegistry:
    """Tests for the estimate-kind registry."""

    def setup_method(self):
        self._saved = dict(EstimateKindRegistry._kinds)

    def teardown_method(self):
        EstimateKindRegistry._kinds.clear()
        EstimateKindRegistry._kinds.update(self._saved)

    def test_built_in_kinds(self):
        names = [info.name for info in EstimateKindRegistry.list_kinds()]
        assert names == [
            "eq11",
            "kpv_cor1",
            "cor2",
            "thm11",
            "lemma11_commutator",
            "eq19_commutator",
            "lemma25_diagonal",
            "lemma32_lowhigh",
        ]

    def test_localized_only_kinds(self):
        localized = {info.name for info in EstimateKindRegistry.list_kinds() if info.localized_only}
        assert localized == {"lemma11_commutator", "eq19_commutator"}

    def test_unknown_kind(self):
        with pytest.raises(EstimateError):
            EstimateKindRegistry.get("nonexistent")

    def test_register_custom_kind(self):
        class Product(EstimateKind):
            info = KindInfo(name="product", description="||fg||_p")

            def lhs_field(self, f, g, fam, spec):
                return f * g

        EstimateKindRegistry.register(Product)
        assert EstimateKindRegistry.is_registered("product")

    def test_duplicate_registration(self):
        with pytest.raises(KeyError):
            register_built_in_kinds()
            EstimateKindRegistry.register(type(EstimateKindRegistry.get("cor2")))

    @pytest.mark.parametrize(
        "kind,spec",
        [
            ("eq11", EstimateSpec(1.0, 0.5, 0.5, 2, 4, 4)),
            ("kpv_cor1", EstimateSpec(2.5, 2.0, 0.5, 2, 4, 4)),
            ("cor2", EstimateSpec(1.5, 0.75, 0.75, 2, 4, 4)),
            ("thm11", EstimateSpec(2.5, 1.0, 1.5, 2, 4, 4, ell=1)),
            ("lemma11_commutator", EstimateSpec(2.0, 1.5, 0.5, 2, 4, 4)),
        ],
    )
    def test_validation(self, kind, spec):
        with pytest.raises(EstimateError):
            spec.validate(kind)


class TestEstimateReport:
    """Tests for estimate_report."""

    def test_report_fields(self, grid, fam):
        f, g = localized_pair(grid, fam, 3, seed=1)
        spec = EstimateSpec(1.0, 0.5, 0.5, 2, 4, 4)
        report = estimate_report("kpv_cor1", f, g, fam, spec, "localized_pair(k=3)", {"k": 3})

        assert report.kind == "kpv_cor1"
        assert report.ratio == pytest.approx(report.lhs / report.rhs)
        assert report.finite
        assert not report.hard_failure
        assert report.family_params == {"k": 3}

    def test_cor2_ratio_vanishes_at_two(self, grid, fam):
        f, g = localized_pair(grid, fam, 3, seed=2)
        report = estimate_report("cor2", f, g, fam, EstimateSpec(2.0, 1.0, 1.0, 2, 4, 4))
        assert report.ratio <= 1e-10

    def test_zero_rhs_and_lhs(self, grid, fam):
        zero = RealField.zeros(grid)
        report = estimate_report("kpv_cor1", zero, zero, fam, EstimateSpec(1.0, 0.5, 0.5, 2, 4, 4))

        assert report.ratio == 0.0
        assert not report.hard_failure

    def test_zero_rhs_with_nonzero_lhs_is_hard_failure(self, grid, fam):
        """D^s of a constant vanishes, so a left-hand side of f itself has nothing to bound it."""

        class Identity(EstimateKind):
            info = KindInfo(name="identity", description="||f||_p")

            def lhs_field(self, f, g, fam, spec):
                return f

        saved = dict(EstimateKindRegistry._kinds)
        EstimateKindRegistry.register(Identity)
        try:
            one = RealField.constant(grid, 1.0)
            report = estimate_report("identity", one, one, fam, EstimateSpec(1.0, 0.5, 0.5, 2, 4, 4))
        finally:
            EstimateKindRegistry._kinds.clear()
            EstimateKindRegistry._kinds.update(saved)

        assert report.hard_failure
        assert report.ratio == math.inf
        assert not report.finite
