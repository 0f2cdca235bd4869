"""
Tests for grids, Fourier multipliers and quadrature norms.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclr.spectral import (
    GridSpec,
    MultiIndex,
    RealField,
    SpectralError,
    dilate,
    dot_gradients,
    hormander_seminorms,
    imaginary_residue,
    lp_norm,
    maximal_function,
    norm_power_derivative,
    partial_derivative,
    riesz_potential,
    to_spectral,
    vector_maximal_norm,
)


@pytest.fixture
def grid():
    return GridSpec(dim=1, points_per_axis=64, period=2 * math.pi)


@pytest.fixture
def grid2d():
    return GridSpec(dim=2, points_per_axis=32, period=2 * math.pi)


class TestGridSpec:
    """Tests for GridSpec validation and frequency tables."""

    def test_rejects_dimension_three(self):
        """Only 1D and 2D grids are supported."""
        with pytest.raises(SpectralError) as exc_info:
            GridSpec(dim=3, points_per_axis=16, period=1.0)

        assert exc_info.value.parameter == "dim"

    @pytest.mark.parametrize("n", [8, 100, 8192])
    def test_rejects_bad_point_counts(self, n):
        """N must be a power of two inside the per-dimension limits."""
        with pytest.raises(SpectralError):
            GridSpec(dim=1, points_per_axis=n, period=1.0)

    def test_rejects_2d_grid_above_limit(self):
        with pytest.raises(SpectralError):
            GridSpec(dim=2, points_per_axis=512, period=1.0)

    @pytest.mark.parametrize("period", [0.0, -1.0, math.inf])
    def test_rejects_bad_period(self, period):
        with pytest.raises(SpectralError):
            GridSpec(dim=1, points_per_axis=16, period=period)

    def test_wavenumbers_are_integers_on_2pi_torus(self, grid):
        """With L = 2 pi the wavenumbers are the integer mode numbers."""
        np.testing.assert_allclose(grid.wavenumbers(), grid.mode_numbers())
        assert grid.nyquist == pytest.approx(32.0)

    def test_frequency_norm_2d(self, grid2d):
        norm = grid2d.frequency_norm
        assert norm[3, 4] == pytest.approx(5.0)
        assert norm.shape == (32, 32)

    def test_grids_compare_by_value(self):
        assert GridSpec(1, 64, 2 * math.pi) == GridSpec(1, 64, 2 * math.pi)
        assert GridSpec(1, 64, 2 * math.pi) != GridSpec(1, 128, 2 * math.pi)


class TestRealField:
    """Tests for field construction and arithmetic."""

    def test_wrong_sample_count_raises(self, grid):
        with pytest.raises(SpectralError):
            RealField(grid, np.zeros(10))

    def test_values_are_read_only(self, grid):
        f = RealField.constant(grid, 1.0)

        with pytest.raises(ValueError):
            f.values[0] = 2.0

    def test_mixing_grids_raises(self, grid):
        other = GridSpec(dim=1, points_per_axis=32, period=2 * math.pi)

        with pytest.raises(SpectralError):
            RealField.zeros(grid) + RealField.zeros(other)

    def test_spectrum_of_cosine(self, grid):
        """cos(3x) has coefficients 1/2 at k = +-3."""
        f = RealField.from_function(grid, lambda x: np.cos(3 * x))
        coeffs = to_spectral(f).coeffs

        assert coeffs[3] == pytest.approx(0.5)
        assert coeffs[-3] == pytest.approx(0.5)
        assert to_spectral(f).hermitian_defect() < 1e-14

    def test_real_field_has_no_imaginary_residue(self, grid):
        f = RealField.from_function(grid, lambda x: np.sin(x) + np.cos(5 * x))
        assert imaginary_residue(to_spectral(f)) < 1e-14


class TestRieszPotential:
    """Tests for D^s = (-Delta)^{s/2}."""

    def test_order_zero_is_identity(self, grid):
        f = RealField.from_function(grid, lambda x: 1.0 + np.sin(2 * x))
        np.testing.assert_allclose(riesz_potential(f, 0.0).values, f.values, atol=1e-14)

    def test_positive_order_annihilates_constants(self, grid):
        f = RealField.constant(grid, 3.0)
        assert riesz_potential(f, 1.5).max_abs() < 1e-14

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 3.5])
    def test_eigenfunction(self, grid, s):
        """D^s sin(3x) = 3^s sin(3x)."""
        f = RealField.from_function(grid, lambda x: np.sin(3 * x))
        np.testing.assert_allclose(riesz_potential(f, s).values, 3.0**s * f.values, atol=1e-12)

    def test_order_two_is_minus_laplacian_2d(self, grid2d):
        f = RealField.from_function(grid2d, lambda x, y: np.cos(2 * x) * np.sin(y))
        np.testing.assert_allclose(riesz_potential(f, 2.0).values, 5.0 * f.values, atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(s=st.floats(0.0, 3.0), t=st.floats(0.0, 3.0))
    def test_semigroup(self, s, t):
        """D^s D^t = D^(s+t) on mean-free fields."""
        grid = GridSpec(dim=1, points_per_axis=32, period=2 * math.pi)
        f = RealField.from_function(grid, lambda x: np.sin(x) + 0.5 * np.cos(4 * x))
        composed = riesz_potential(riesz_potential(f, s), t)
        direct = riesz_potential(f, s + t)
        np.testing.assert_allclose(composed.values, direct.values, atol=1e-9 * max(1.0, 4.0 ** (s + t)))


class TestDerivatives:
    """Tests for spectral partial derivatives and MultiIndex."""

    def test_derivative_of_sine(self, grid):
        f = RealField.from_function(grid, np.sin)
        expected = RealField.from_function(grid, np.cos)
        np.testing.assert_allclose(partial_derivative(f, 1).values, expected.values, atol=1e-12)

    def test_dot_gradients(self, grid2d):
        f = RealField.from_function(grid2d, lambda x, y: np.sin(x))
        g = RealField.from_function(grid2d, lambda x, y: np.sin(x) + np.sin(y))
        expected = RealField.from_function(grid2d, lambda x, y: np.cos(x) ** 2)
        np.testing.assert_allclose(dot_gradients(f, g).values, expected.values, atol=1e-12)

    def test_multi_index_order_limit(self):
        with pytest.raises(SpectralError):
            MultiIndex((3, 2))

    def test_multi_index_factorial_and_order(self):
        alpha = MultiIndex((2, 1))
        assert alpha.order == 3
        assert alpha.factorial == 2

    def test_of_order_lists_all_indices(self):
        assert [a.entries for a in MultiIndex.of_order(2, 2)] == [(0, 2), (1, 1), (2, 0)]

    def test_coerce_checks_length(self):
        with pytest.raises(SpectralError):
            MultiIndex.coerce((1, 0), 1)


class TestNormPowerDerivative:
    """Tests for closed-form derivatives of |v|^s."""

    def test_first_derivative_1d(self):
        """d/dv |v|^3 = 3 v |v|."""
        values, singular = norm_power_derivative(np.array([[2.0], [-2.0]]), 3.0, MultiIndex((1,)))
        np.testing.assert_allclose(values, [12.0, -12.0])
        assert not singular.any()

    def test_second_derivative_of_square(self):
        values, _ = norm_power_derivative(np.array([[0.0], [5.0]]), 2.0, MultiIndex((2,)))
        np.testing.assert_allclose(values, [2.0, 2.0])

    def test_singular_point_is_flagged_and_zeroed(self):
        values, singular = norm_power_derivative(np.array([[0.0]]), 0.5, MultiIndex((1,)))
        assert singular[0]
        assert values[0] == 0.0

    def test_mixed_derivative_2d(self):
        """d_x d_y |v|^4 = 8 x y."""
        v = np.array([[1.0, 2.0], [-0.5, 3.0]])
        values, _ = norm_power_derivative(v, 4.0, MultiIndex((1, 1)))
        np.testing.assert_allclose(values, 8 * v[:, 0] * v[:, 1])

    def test_hormander_seminorms_are_scale_free(self):
        """Q_alpha of |xi|^s does not depend on the sample radius."""
        small = hormander_seminorms(1.5, [1, 2, 3], [0.5], dim=1)
        large = hormander_seminorms(1.5, [1, 2, 3], [64.0], dim=1)
        for alpha in small:
            assert small[alpha] == pytest.approx(large[alpha], rel=1e-12)

    def test_hormander_rejects_non_positive_radius(self):
        with pytest.raises(SpectralError):
            hormander_seminorms(1.0, [1], [0.0])


class TestNorms:
    """Tests for quadrature norms and the maximal function."""

    def test_lp_norm_of_constant(self, grid):
        f = RealField.constant(grid, 1.0)
        assert lp_norm(f, 2) == pytest.approx(math.sqrt(2 * math.pi))
        assert lp_norm(f, 4) == pytest.approx((2 * math.pi) ** 0.25)

    def test_lp_norm_of_zero(self, grid):
        assert lp_norm(RealField.zeros(grid), 3) == 0.0

    @pytest.mark.parametrize("p", [0.5, math.inf, math.nan])
    def test_lp_norm_rejects_bad_exponent(self, grid, p):
        with pytest.raises(SpectralError):
            lp_norm(RealField.constant(grid, 1.0), p)

    def test_lp_norm_large_exponent_does_not_overflow(self, grid):
        f = RealField.constant(grid, 1e200)
        assert math.isfinite(lp_norm(f, 50))

    def test_maximal_function_dominates(self, grid):
        f = RealField.from_function(grid, lambda x: np.sin(5 * x) * np.exp(np.cos(x)))
        assert np.all(maximal_function(f).values >= np.abs(f.values))

    def test_maximal_function_is_monotone(self, grid):
        rng = np.random.default_rng(0)
        small = np.abs(rng.standard_normal(grid.points_per_axis))
        f = RealField(grid, small)
        g = RealField(grid, small + np.abs(rng.standard_normal(grid.points_per_axis)))
        assert np.all(maximal_function(f).values <= maximal_function(g).values)

    def test_maximal_function_of_constant(self, grid2d):
        f = RealField.constant(grid2d, 2.0)
        np.testing.assert_allclose(maximal_function(f).values, 2.0)

    def test_vector_maximal_norm_checks_exponents(self, grid):
        f = RealField.constant(grid, 1.0)
        with pytest.raises(SpectralError):
            vector_maximal_norm([f], 1.0, 2.0)
        with pytest.raises(SpectralError):
            vector_maximal_norm([], 2.0, 2.0)


class TestDilate:
    """Tests for exact torus dilation."""

    def test_dilation_of_sine(self, grid):
        f = RealField.from_function(grid, np.sin)
        expected = RealField.from_function(grid, lambda x: np.sin(4 * x))
        np.testing.assert_allclose(dilate(f, 4).values, expected.values, atol=1e-12)

    @pytest.mark.parametrize("factor", [0, -2, 1.5])
    def test_rejects_bad_factor(self, grid, factor):
        with pytest.raises(SpectralError):
            dilate(RealField.zeros(grid), factor)
