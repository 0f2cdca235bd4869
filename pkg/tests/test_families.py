"""
Tests for the seeded test-function families.
"""

import math

import numpy as np
import pytest

from fraclr.families import (
    FamilySpec,
    GenerationError,
    dilation_grid,
    gaussian_pair,
    generate,
    localized_pair,
    product_band_edge,
    random_bandlimited,
    random_spectrum,
)
from fraclr.littlewood_paley import build_family
from fraclr.spectral import GridSpec, lp_norm, to_spectral


@pytest.fixture
def grid():
    return GridSpec(dim=1, points_per_axis=128, period=2 * math.pi)


@pytest.fixture
def fam(grid):
    return build_family(grid, 0, 5)


def _support(f):
    """Frequency magnitudes carrying energy above roundoff."""
    coeffs = np.abs(to_spectral(f).coeffs)
    return f.grid.frequency_norm[coeffs > 1e-12 * coeffs.max()]


class TestRandomSpectrum:
    """Tests for seeded band-limited noise."""

    def test_same_seed_same_field(self, grid):
        first = random_spectrum(grid, 7, 20.0)
        second = random_spectrum(grid, 7, 20.0)
        np.testing.assert_array_equal(first.values, second.values)

    def test_different_seeds_differ(self, grid):
        assert not np.array_equal(random_spectrum(grid, 1, 20.0).values, random_spectrum(grid, 2, 20.0).values)

    def test_spectrum_stays_in_annulus(self, grid):
        support = _support(random_spectrum(grid, 3, 20.0, 5.0))
        assert support.min() >= 5.0
        assert support.max() <= 20.0

    def test_grid_independent_modes(self):
        """The same seed draws the same coefficients on a finer grid."""
        coarse = GridSpec(dim=1, points_per_axis=64, period=2 * math.pi)
        fine = GridSpec(dim=1, points_per_axis=128, period=2 * math.pi)
        a = to_spectral(random_spectrum(coarse, 5, 10.0)).coeffs
        b = to_spectral(random_spectrum(fine, 5, 10.0)).coeffs
        np.testing.assert_allclose(a[1:11], b[1:11], atol=1e-12)

    def test_aliasing_cap_raises(self, grid):
        with pytest.raises(GenerationError):
            random_spectrum(grid, 0, 64.0)

    def test_negative_seed_raises(self, grid):
        with pytest.raises(GenerationError):
            random_spectrum(grid, -1, 10.0)


class TestLocalizedPair:
    """Tests for the frequency-separated pair."""

    @pytest.mark.parametrize("k", [3, 4])
    def test_supports(self, grid, fam, k):
        f, g = localized_pair(grid, fam, k, seed=0)
        f_support, g_support = _support(f), _support(g)

        assert f_support.max() <= 2.0 ** (k - 2)
        assert g_support.min() >= 2.0 ** (k - 1)
        assert g_support.max() <= 2.0 ** (k + 1)

    def test_normalized(self, grid, fam):
        f, g = localized_pair(grid, fam, 4, seed=3)
        assert lp_norm(f, 2) == pytest.approx(1.0)
        assert lp_norm(g, 2) == pytest.approx(1.0)

    def test_band_outside_family(self, grid, fam):
        with pytest.raises(GenerationError):
            localized_pair(grid, fam, 6)

    def test_product_must_resolve(self, grid, fam):
        """k = 5 fits the family, but f g reaches 2^6 + 2^3, past the Nyquist frequency 64."""
        assert product_band_edge(5) == 72.0
        with pytest.raises(GenerationError, match="Nyquist"):
            localized_pair(grid, fam, 5)

    def test_largest_resolved_band(self, grid, fam):
        assert product_band_edge(4) < grid.nyquist
        f, g = localized_pair(grid, fam, 4)
        product = to_spectral(f * g)
        norm = grid.frequency_norm
        assert np.abs(product.coeffs[norm > product_band_edge(4)]).max() < 1e-14


class TestGaussianPair:
    """Tests for the Gaussian bumps."""

    def test_mean_free_and_normalized(self, grid):
        f, g = gaussian_pair(grid)
        assert abs(f.values.mean()) < 1e-14
        assert lp_norm(g, 2) == pytest.approx(1.0)

    def test_g_is_shifted_f(self, grid):
        f, g = gaussian_pair(grid)
        assert int(np.argmax(g.values)) > int(np.argmax(f.values))

    def test_too_wide(self, grid):
        with pytest.raises(GenerationError):
            gaussian_pair(grid, width=grid.period)


class TestRandomBandlimited:
    def test_band_range_checked(self, grid, fam):
        with pytest.raises(GenerationError):
            random_bandlimited(grid, fam, 3, 3, 0)
        with pytest.raises(GenerationError):
            random_bandlimited(grid, fam, 0, 6, 0)

    def test_support(self, grid, fam):
        support = _support(random_bandlimited(grid, fam, 1, 4, 9))
        assert support.min() >= 2.0
        assert support.max() <= 16.0


class TestFamilySpec:
    """Tests for family instances and generate()."""

    def test_unknown_kind(self, grid, fam):
        with pytest.raises(GenerationError):
            FamilySpec("brownian", grid, fam)

    def test_family_grid_must_match(self, grid):
        other = GridSpec(dim=1, points_per_axis=64, period=2 * math.pi)
        with pytest.raises(GenerationError):
            FamilySpec("gaussian", grid, build_family(other, 0, 4))

    def test_labels_and_params(self, grid, fam):
        spec = FamilySpec("localized_pair", grid, fam, k=5)
        assert spec.label == "localized_pair(k=5)"
        assert spec.params()["lambda"] == 1
        assert spec.params()["N"] == 128

    def test_hashable(self, grid, fam):
        specs = {FamilySpec("gaussian", grid, fam), FamilySpec("gaussian", grid, fam)}
        assert len(specs) == 1

    def test_generate_random(self, grid, fam):
        f, g = generate(FamilySpec("random_bandlimited", grid, fam, seed=4, j_lo=1, j_hi=3))
        assert not np.array_equal(f.values, g.values)


class TestDilation:
    """Tests for the dilation family."""

    def test_dilation_grid(self):
        grid, fam = dilation_grid()
        assert grid.points_per_axis == 4096
        assert (fam.j_min, fam.j_max) == (0, 10)

    def test_factor(self):
        grid, fam = dilation_grid()
        assert FamilySpec("dilation", grid, fam, k=3, t=-2).dilation_factor == 1
        assert FamilySpec("dilation", grid, fam, k=3, t=2).dilation_factor == 16

    def test_dilated_support_scales(self):
        grid, fam = dilation_grid()
        base_f, base_g = generate(FamilySpec("dilation", grid, fam, k=3, t=-2))
        f, g = generate(FamilySpec("dilation", grid, fam, k=3, t=0))

        assert _support(g).max() == pytest.approx(4 * _support(base_g).max())
        assert _support(f).min() == pytest.approx(4 * _support(base_f).min())

    def test_dilated_band_leaving_window(self):
        grid, fam = dilation_grid()
        with pytest.raises(GenerationError):
            generate(FamilySpec("dilation", grid, fam, k=8, t=2))
