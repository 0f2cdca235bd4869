"""
Tests for the dyadic partition and Littlewood-Paley projections.
"""

import math

import numpy as np
import pytest

from fraclr.littlewood_paley import (
    FamilyError,
    build_family,
    decompose_bands,
    lemma22_bound_check,
    mu,
    phi_hat,
    project,
    project_gt,
    project_leq,
    project_widened,
    smooth_step,
    square_function_ratio,
    transition,
    triebel_lizorkin_norm,
)
from fraclr.spectral import GridSpec, RealField, lp_norm


@pytest.fixture
def grid():
    return GridSpec(dim=1, points_per_axis=128, period=2 * math.pi)


@pytest.fixture
def fam(grid):
    return build_family(grid, 0, 5)


def _mode(grid, k):
    return RealField.from_function(grid, lambda x: np.cos(k * x))


class TestSmoothStep:
    """Tests for the radial step and the mother band."""

    def test_transition_endpoints(self):
        values = transition(np.array([-1.0, 0.0, 0.5, 1.0, 2.0]))
        np.testing.assert_allclose(values, [0.0, 0.0, 0.5, 1.0, 1.0])

    def test_step_is_exactly_one_and_zero_outside_transition(self):
        r = np.array([0.0, 0.5, 1.0, 2.0, 3.0])
        assert list(smooth_step(r)) == [1.0, 1.0, 1.0, 0.0, 0.0]

    def test_step_is_non_increasing(self):
        r = np.linspace(0.0, 3.0, 2001)
        assert np.all(np.diff(smooth_step(r)) <= 1e-15)

    def test_phi_hat_support(self):
        r = np.array([0.25, 0.5, 2.0, 4.0])
        np.testing.assert_array_equal(phi_hat(r), 0.0)
        assert phi_hat(np.array([1.0]))[0] > 0


class TestLPFamily:
    """Tests for family construction and tables."""

    def test_rejects_empty_band_range(self, grid):
        with pytest.raises(FamilyError):
            build_family(grid, 3, 3)

    def test_rejects_aliasing_band(self, grid):
        """On N = 128, L = 2 pi the Nyquist frequency is 64, so j_max <= 5."""
        with pytest.raises(FamilyError) as exc_info:
            build_family(grid, 0, 6)

        assert exc_info.value.parameter == "j_max"

    def test_partition_of_unity(self, fam):
        assert fam.partition_defect() < 1e-14

    def test_phi_is_difference_of_psi(self, fam):
        for j in fam.bands:
            np.testing.assert_array_equal(
                fam.phi_multiplier(j), fam.psi_multiplier(j) - fam.psi_multiplier(j - 1)
            )

    def test_tables_outside_margin_raise(self, fam):
        with pytest.raises(FamilyError):
            fam.phi_multiplier(fam.j_max + 3)

    def test_multiplier_tables_names(self, fam):
        names = set(fam.multiplier_tables())
        assert names == {f"phi_{j}" for j in fam.bands} | {f"psi_{j}" for j in fam.bands}

    def test_tables_are_read_only(self, fam):
        with pytest.raises(ValueError):
            fam.psi_multiplier(0)[0] = 2.0


class TestProjections:
    """Tests for P_j, P_{<=j}, P_{>j} and the widened projection."""

    def test_band_keeps_its_center(self, grid, fam):
        """cos(8x) sits at the center of band 3, where Phi_hat_3 = 1."""
        f = _mode(grid, 8)
        np.testing.assert_allclose(project(f, fam, 3).values, f.values, atol=1e-14)
        assert project(f, fam, 1).max_abs() < 1e-14

    def test_low_and_high_split(self, grid, fam):
        f = _mode(grid, 3) + _mode(grid, 30)
        total = project_leq(f, fam, 2) + project_gt(f, fam, 2)
        np.testing.assert_allclose(total.values, f.values, atol=1e-13)

    def test_widened_is_identity_on_band(self, grid, fam):
        f = _mode(grid, 5) + _mode(grid, 11)
        band = project(f, fam, 3)
        np.testing.assert_allclose(project_widened(band, fam, 3).values, band.values, atol=1e-13)

    def test_band_index_checked(self, grid, fam):
        with pytest.raises(FamilyError):
            project(_mode(grid, 1), fam, fam.j_max + 1)

    def test_low_index_range(self, grid, fam):
        low, high = fam.low_range
        project_leq(_mode(grid, 1), fam, low)
        with pytest.raises(FamilyError):
            project_leq(_mode(grid, 1), fam, high + 1)

    def test_grid_mismatch(self, fam):
        other = GridSpec(dim=1, points_per_axis=64, period=2 * math.pi)
        with pytest.raises(FamilyError):
            project(RealField.zeros(other), fam, 1)

    def test_decomposition_reconstructs(self, grid, fam):
        f = _mode(grid, 1) + _mode(grid, 7) + 0.3 * _mode(grid, 20)
        pieces = decompose_bands(f, fam)
        np.testing.assert_allclose(pieces.reconstruct().values, f.values, atol=1e-13)


class TestNorms:
    """Tests for the Triebel-Lizorkin norm and the square function."""

    def test_mu(self):
        assert mu(2.0) == 2.0
        assert mu(1.25) == pytest.approx(4.0)

    def test_single_band_norm(self, grid, fam):
        """A mode at a band center has F^s_{p,q} norm 2^{sj} ||f||_p."""
        f = _mode(grid, 8)
        value = triebel_lizorkin_norm(f, fam, 1.0, 2.0, 2.0)
        assert value == pytest.approx(8.0 * lp_norm(f, 2.0), rel=1e-12)

    @pytest.mark.parametrize("p,q", [(1.0, 2.0), (2.0, 0.5)])
    def test_norm_rejects_exponents(self, grid, fam, p, q):
        with pytest.raises(FamilyError):
            triebel_lizorkin_norm(_mode(grid, 4), fam, 0.0, p, q)

    def test_square_function_ratio_bounded(self, grid, fam):
        f = _mode(grid, 3) + _mode(grid, 9) + _mode(grid, 17)
        ratio = square_function_ratio(f, fam, 3.0)
        assert 1.0 / (1.2 * mu(3.0)) <= ratio <= 1.2 * mu(3.0)

    def test_square_function_of_zero_raises(self, grid, fam):
        with pytest.raises(FamilyError):
            square_function_ratio(RealField.zeros(grid), fam, 2.0)


class TestMaximalBound:
    """Tests for the pointwise maximal bound of D^s P_{<=k}."""

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_bound_holds_for_positive_field(self, grid, fam, s):
        f = RealField.from_function(grid, lambda x: 2.0 + np.cos(x))
        report = lemma22_bound_check(f, fam, s, 3)

        assert report.violations == 0
        assert report.c_num > 0
        assert report.to_dict()["k"] == 3

    def test_negative_order_raises(self, grid, fam):
        with pytest.raises(FamilyError):
            lemma22_bound_check(_mode(grid, 1), fam, -1.0, 2)
