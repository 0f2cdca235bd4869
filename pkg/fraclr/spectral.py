"""
Periodic spectral grids, Fourier multipliers and quadrature norms for fraclr.

R^n is approximated by the torus [0, L)^dim sampled on N points per axis.
Fields are stored as real samples (RealField) or as Fourier-series
coefficients (SpectralField), f(x) = sum_k c_k exp(i xi_k . x) with
xi_k = 2 pi k / L. Every operator here is a Fourier multiplier, a quadrature
norm or the discrete Hardy-Littlewood maximal operator.

Usage:
    from fraclr.spectral import GridSpec, RealField, riesz_potential, lp_norm

    grid = GridSpec(dim=1, points_per_axis=256, period=2 * math.pi)
    f = RealField.from_function(grid, lambda x: np.sin(3 * x))
    lp_norm(riesz_potential(f, 1.5), 2)
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np
import scipy.fft as sfft

logger = logging.getLogger(__name__)

MAX_DERIVATIVE_ORDER = 4

# Resolution limits per dimension: (smallest N, largest N).
_POINT_LIMITS = {1: (16, 4096), 2: (16, 256)}


class SpectralError(Exception):
    """Exception raised for invalid grids, fields or operator parameters."""

    def __init__(self, message: str, parameter: str | None = None, value: object = None) -> None:
        self.message = message
        self.parameter = parameter
        self.value = value
        super().__init__(message)

    def __str__(self) -> str:
        if self.parameter is None:
            return self.message
        return f"{self.message} ({self.parameter}={self.value!r})"


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class GridSpec:
    """
    A periodic sampling grid on [0, L)^dim.

    Attributes:
        dim: Spatial dimension, 1 or 2.
        points_per_axis: Number of samples N per axis, a power of two.
        period: Physical side length L of the torus.
    """

    dim: int = 1
    points_per_axis: int = 256
    period: float = 16 * math.pi

    def __post_init__(self) -> None:
        if self.dim not in _POINT_LIMITS:
            raise SpectralError("Grid dimension must be 1 or 2", "dim", self.dim)

        n = self.points_per_axis
        low, high = _POINT_LIMITS[self.dim]
        if n < low or n > high or n & (n - 1):
            raise SpectralError(
                f"points_per_axis must be a power of two in [{low}, {high}]",
                "points_per_axis",
                n,
            )
        if not self.period > 0 or not math.isfinite(self.period):
            raise SpectralError("Grid period must be positive and finite", "period", self.period)

    @property
    def spacing(self) -> float:
        """Grid spacing h = L / N."""
        return self.period / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return self.period**self.dim

    @property
    def nyquist(self) -> float:
        """Largest resolved frequency magnitude along an axis, pi N / L."""
        return math.pi * self.points_per_axis / self.period

    def wavenumbers(self) -> np.ndarray:
        """Axis frequencies xi_k = 2 pi k / L in FFT order, k in [-N/2, N/2)."""
        return 2 * math.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)

    def mode_numbers(self) -> np.ndarray:
        """Integer mode numbers k in FFT order."""
        return np.rint(np.fft.fftfreq(self.points_per_axis) * self.points_per_axis).astype(int)

    @cached_property
    def frequencies(self) -> tuple[np.ndarray, ...]:
        axis = self.wavenumbers()
        return tuple(_frozen(c) for c in np.meshgrid(*([axis] * self.dim), indexing="ij"))

    @cached_property
    def frequency_vectors(self) -> np.ndarray:
        """Frequencies stacked as an array of shape grid.shape + (dim,)."""
        return _frozen(np.stack(self.frequencies, axis=-1))

    @cached_property
    def frequency_norm(self) -> np.ndarray:
        return _frozen(np.sqrt(sum(c**2 for c in self.frequencies)))

    def coordinates(self) -> tuple[np.ndarray, ...]:
        axis = np.arange(self.points_per_axis) * self.spacing
        return tuple(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    def centered_coordinates(self, center: Sequence[float] | float = 0.0) -> tuple[np.ndarray, ...]:
        """
        Periodized sawtooth coordinates x - center, wrapped into [-L/2, L/2).

        Args:
            center: Point the coordinates are centered on (scalar or per axis).

        Returns:
            One array per axis, each of shape grid.shape.
        """
        centers = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        half = self.period / 2
        return tuple(
            np.mod(x - c + half, self.period) - half
            for x, c in zip(self.coordinates(), centers, strict=True)
        )


@dataclass(frozen=True)
class MultiIndex:
    """A multi-index alpha with |alpha| <= 4."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        entries = tuple(int(a) for a in self.entries)
        if any(a < 0 for a in entries):
            raise SpectralError("Multi-index entries must be non-negative", "entries", entries)
        if sum(entries) > MAX_DERIVATIVE_ORDER:
            raise SpectralError(
                f"Multi-index order must not exceed {MAX_DERIVATIVE_ORDER}", "entries", entries
            )
        object.__setattr__(self, "entries", entries)

    @property
    def order(self) -> int:
        return sum(self.entries)

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def factorial(self) -> int:
        """alpha! = alpha_1! ... alpha_n!"""
        return math.prod(math.factorial(a) for a in self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __add__(self, other: MultiIndex) -> MultiIndex:
        return MultiIndex(tuple(a + b for a, b in zip(self.entries, other.entries, strict=True)))

    def monomial(self, vectors: np.ndarray) -> np.ndarray:
        """Evaluate v^alpha over the last axis of an array of vectors."""
        result = np.ones(vectors.shape[:-1])
        for axis, power in enumerate(self.entries):
            if power:
                result = result * vectors[..., axis] ** power
        return result

    @classmethod
    def coerce(cls, alpha: MultiIndex | Sequence[int] | int, dim: int) -> MultiIndex:
        """Build a MultiIndex from a tuple (or an int in 1D) and check its length."""
        if isinstance(alpha, MultiIndex):
            index = alpha
        elif isinstance(alpha, int):
            index = cls((alpha,))
        else:
            index = cls(tuple(alpha))
        if index.dim != dim:
            raise SpectralError(
                f"Multi-index length must equal the grid dimension {dim}", "entries", index.entries
            )
        return index

    @classmethod
    def of_order(cls, dim: int, order: int) -> list[MultiIndex]:
        """All multi-indices of length dim and total order `order`, lexicographically."""
        return [
            cls(entries)
            for entries in product(range(order + 1), repeat=dim)
            if sum(entries) == order
        ]


@dataclass(frozen=True, eq=False)
class RealField:
    """Real samples of a periodic function on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.size != self.grid.size:
            raise SpectralError(
                f"Field has {values.size} samples, grid expects {self.grid.size}",
                "values",
                values.shape,
            )
        object.__setattr__(self, "values", _frozen(values.reshape(self.grid.shape)))

    @classmethod
    def zeros(cls, grid: GridSpec) -> RealField:
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> RealField:
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: GridSpec, func: Callable[..., np.ndarray]) -> RealField:
        """Sample func(x_1, ..., x_dim) on the grid coordinates."""
        return cls(grid, func(*grid.coordinates()))

    def to_spectral(self) -> SpectralField:
        return to_spectral(self)

    def check_grid(self, other: RealField) -> None:
        if other.grid != self.grid:
            raise SpectralError("Fields live on different grids", "grid", (self.grid, other.grid))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def _combine(self, other: RealField | float, op: Callable) -> RealField:
        if isinstance(other, RealField):
            self.check_grid(other)
            return RealField(self.grid, op(self.values, other.values))
        return RealField(self.grid, op(self.values, float(other)))

    def __add__(self, other: RealField | float) -> RealField:
        return self._combine(other, np.add)

    def __radd__(self, other: float) -> RealField:
        return self._combine(other, np.add)

    def __sub__(self, other: RealField | float) -> RealField:
        return self._combine(other, np.subtract)

    def __mul__(self, other: RealField | float) -> RealField:
        return self._combine(other, np.multiply)

    def __rmul__(self, other: float) -> RealField:
        return self._combine(other, np.multiply)

    def __truediv__(self, other: float) -> RealField:
        return RealField(self.grid, self.values / float(other))

    def __neg__(self) -> RealField:
        return RealField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier-series coefficients c_k of a periodic function, FFT ordered."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if coeffs.size != self.grid.size:
            raise SpectralError(
                f"Spectrum has {coeffs.size} modes, grid expects {self.grid.size}",
                "coeffs",
                coeffs.shape,
            )
        object.__setattr__(self, "coeffs", _frozen(coeffs.reshape(self.grid.shape)))

    @property
    def continuum_coeffs(self) -> np.ndarray:
        """Coefficients scaled by L^dim, approximating the continuum transform."""
        return self.coeffs * self.grid.volume

    def to_real(self) -> RealField:
        return to_real(self)

    def hermitian_defect(self) -> float:
        """Relative deviation from c(-k) = conj(c(k))."""
        mirrored = np.conj(self.coeffs[tuple(_negated_index(self.grid))])
        scale = max(float(np.max(np.abs(self.coeffs))), np.finfo(float).tiny)
        return float(np.max(np.abs(self.coeffs - mirrored))) / scale

    def __add__(self, other: SpectralField) -> SpectralField:
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, factor: complex) -> SpectralField:
        return SpectralField(self.grid, self.coeffs * factor)

    __rmul__ = __mul__


def _negated_index(grid: GridSpec) -> list[np.ndarray]:
    index = (-np.arange(grid.points_per_axis)) % grid.points_per_axis
    return list(np.ix_(*([index] * grid.dim)))


def to_spectral(f: RealField) -> SpectralField:
    """Forward transform: coefficients c_k = N^{-dim} DFT(f)."""
    return SpectralField(f.grid, sfft.fftn(f.values) / f.grid.size)


def to_complex_values(spectrum: SpectralField) -> np.ndarray:
    """Inverse transform without discarding the imaginary part."""
    return sfft.ifftn(spectrum.coeffs * spectrum.grid.size)


def to_real(spectrum: SpectralField) -> RealField:
    """Inverse transform, keeping the real part."""
    return RealField(spectrum.grid, np.real(to_complex_values(spectrum)))


def imaginary_residue(spectrum: SpectralField) -> float:
    """Largest imaginary sample relative to the largest sample magnitude."""
    values = to_complex_values(spectrum)
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    return float(np.max(np.abs(values.imag))) / scale


def riesz_multiplier(grid: GridSpec, s: float) -> np.ndarray:
    """
    The symbol |xi|^s on the grid.

    The zero frequency maps to 0 for every s != 0 and to 1 for s == 0, so
    D^0 is the identity and D^s annihilates constants otherwise.
    """
    if s == 0:
        return np.ones(grid.shape)
    norm = grid.frequency_norm
    multiplier = np.zeros(grid.shape)
    nonzero = norm > 0
    multiplier[nonzero] = norm[nonzero] ** s
    return multiplier


def derivative_multiplier(grid: GridSpec, alpha: MultiIndex) -> np.ndarray:
    """The symbol (i xi)^alpha on the grid."""
    return (1j) ** alpha.order * alpha.monomial(grid.frequency_vectors)


def apply_multiplier_complex(f: RealField, multiplier: np.ndarray) -> np.ndarray:
    """Apply a Fourier multiplier and return complex samples."""
    spectrum = to_spectral(f)
    return to_complex_values(SpectralField(f.grid, spectrum.coeffs * multiplier))


def apply_multiplier(f: RealField, multiplier: np.ndarray) -> RealField:
    """Apply a Fourier multiplier and keep the real part of the result."""
    return RealField(f.grid, np.real(apply_multiplier_complex(f, multiplier)))


def riesz_potential(f: RealField, s: float) -> RealField:
    """
    Apply D^s = (-Delta)^{s/2}.

    Args:
        f: Input field.
        s: Order; negative orders annihilate the zero mode.

    Returns:
        The field D^s f.
    """
    return apply_multiplier(f, riesz_multiplier(f.grid, s))


def partial_derivative(f: RealField, alpha: MultiIndex | Sequence[int] | int) -> RealField:
    """Apply the spectral derivative d^alpha."""
    index = MultiIndex.coerce(alpha, f.grid.dim)
    if index.order == 0:
        return f
    return apply_multiplier(f, derivative_multiplier(f.grid, index))


def unit_index(dim: int, axis: int) -> MultiIndex:
    return MultiIndex(tuple(1 if m == axis else 0 for m in range(dim)))


def gradient(f: RealField) -> list[RealField]:
    return [partial_derivative(f, unit_index(f.grid.dim, m)) for m in range(f.grid.dim)]


def dot_gradients(f: RealField, g: RealField) -> RealField:
    """The pointwise product grad f . grad g."""
    f.check_grid(g)
    total = RealField.zeros(f.grid)
    for df, dg in zip(gradient(f), gradient(g), strict=True):
        total = total + df * dg
    return total


def _check_exponent(p: float, name: str = "p", allow_infinite: bool = False) -> None:
    if math.isinf(p) and allow_infinite and p > 0:
        return
    if not math.isfinite(p) or p < 1:
        raise SpectralError(f"Exponent {name} must be a finite real >= 1", name, p)


def lp_norm(f: RealField, p: float) -> float:
    """
    Quadrature L^p norm (h^dim sum |f_i|^p)^{1/p} for 1 <= p < infinity.

    Raises:
        SpectralError: If p < 1 or p is not finite.
    """
    _check_exponent(p)
    magnitude = np.abs(f.values)
    scale = float(np.max(magnitude))
    if scale == 0:
        return 0.0
    # Normalizing by the maximum keeps large p away from overflow.
    total = float(np.sum((magnitude / scale) ** p)) * f.grid.cell_volume
    return scale * total ** (1.0 / p)


def lq_aggregate(stack: np.ndarray, q: float) -> np.ndarray:
    """Pointwise l^q norm over the leading axis of a stacked array."""
    magnitude = np.abs(stack)
    if math.isinf(q):
        return magnitude.max(axis=0)
    return np.sum(magnitude**q, axis=0) ** (1.0 / q)


def _ball_plan(grid: GridSpec) -> tuple[list[dict[int, list[int]]], list[int]]:
    """
    Row decomposition of the dyadic discrete balls.

    The ball of radius 2^i h holds the grid points at distance < 2^i h. In 2D
    each ball is a stack of horizontal windows; the plan maps every window
    half-width to the (ball, vertical offset) pairs that use it.
    """
    n_radii = int(math.log2(grid.points_per_axis // 2)) + 1
    plan: dict[int, list[tuple[int, int]]] = {}
    counts = []
    for index in range(n_radii):
        radius = 2**index
        offsets = range(-(radius - 1), radius) if grid.dim == 2 else (0,)
        count = 0
        for dy in offsets:
            half = math.isqrt(radius * radius - dy * dy - 1)
            plan.setdefault(half, []).append((index, dy))
            count += 2 * half + 1
        counts.append(count)
    return [plan], counts


def maximal_function(f: RealField) -> RealField:
    """
    Discrete Hardy-Littlewood maximal function over dyadic radii.

    Mf(x) = max_i avg_{B(x, 2^i h)} |f| for 0 <= i <= log2(N/2). Ball sums are
    accumulated from non-negative terms in a fixed order, so f <= g pointwise
    implies Mf <= Mg exactly in floating point.
    """
    grid = f.grid
    magnitude = np.abs(f.values)
    [plan], counts = _ball_plan(grid)
    sums = [np.zeros(grid.shape) for _ in counts]

    window = magnitude.copy()
    for half in range(max(plan) + 1):
        if half:
            window = window + np.roll(magnitude, half, axis=-1) + np.roll(magnitude, -half, axis=-1)
        for index, dy in plan.get(half, ()):
            shifted = np.roll(window, dy, axis=0) if grid.dim == 2 else window
            sums[index] = sums[index] + shifted

    averages = np.stack([total / count for total, count in zip(sums, counts, strict=True)])
    return RealField(grid, averages.max(axis=0))


def vector_maximal_norm(fs: Sequence[RealField], p: float, q: float) -> float:
    """
    The mixed norm || (M f_j)_j ||_{L^p(l^q_j)}.

    Args:
        fs: Fields sharing one grid.
        p: Outer Lebesgue exponent, 1 < p < infinity.
        q: Inner sequence exponent, 1 < q <= infinity.
    """
    if not fs:
        raise SpectralError("Need at least one field", "fs", len(fs))
    if not (1 < p < math.inf):
        raise SpectralError("Exponent p must satisfy 1 < p < infinity", "p", p)
    if not q > 1:
        raise SpectralError("Exponent q must satisfy 1 < q <= infinity", "q", q)
    for other in fs[1:]:
        fs[0].check_grid(other)

    stack = np.stack([maximal_function(f).values for f in fs])
    return lp_norm(RealField(fs[0].grid, lq_aggregate(stack, q)), p)


def dilate(f: RealField, factor: int) -> RealField:
    """
    Exact torus dilation x -> f(factor * x) for a positive integer factor.

    Sampling identity: f(factor * x_i) = f(x_{factor * i mod N}).
    """
    if factor < 1 or int(factor) != factor:
        raise SpectralError("Dilation factor must be a positive integer", "factor", factor)
    n = f.grid.points_per_axis
    index = (int(factor) * np.arange(n)) % n
    return RealField(f.grid, f.values[np.ix_(*([index] * f.grid.dim))])


def _qpow(q: np.ndarray, exponent: float) -> np.ndarray:
    """q**exponent with the value at q = 0 fixed to 1 (exponent 0) or 0 (otherwise)."""
    positive = q > 0
    base = np.where(positive, q, 1.0)
    at_zero = 1.0 if exponent == 0 else 0.0
    return np.where(positive, base**exponent, at_zero)


def norm_power_derivative(
    vectors: np.ndarray, s: float, alpha: MultiIndex
) -> tuple[np.ndarray, np.ndarray]:
    """
    Closed-form derivative d^alpha |v|^s over the last axis of `vectors`.

    Writes |v|^s = F(|v|^2) with F(q) = q^{s/2} and sums the chain rule for a
    separable quadratic:

        sum_{beta <= alpha/2} prod_i alpha_i! / (beta_i! (alpha_i - 2 beta_i)!)
            (2 v_i)^{alpha_i - 2 beta_i} F^{(|alpha| - |beta|)}(|v|^2)

    Args:
        vectors: Array of shape (..., dim).
        s: Homogeneity degree.
        alpha: Derivative multi-index of length dim.

    Returns:
        (values, singular) where singular marks v = 0 with s < |alpha| and a
        non-vanishing derivative. Singular points evaluate to 0.
    """
    q = np.sum(vectors**2, axis=-1)
    total = np.zeros(q.shape)
    vanishes = True
    for beta in product(*(range(a // 2 + 1) for a in alpha.entries)):
        rank = alpha.order - sum(beta)
        falling = math.prod(s / 2 - i for i in range(rank))
        if falling == 0:
            continue
        vanishes = False
        term = np.full(q.shape, falling)
        for axis, (a, b) in enumerate(zip(alpha.entries, beta, strict=True)):
            term = term * (math.factorial(a) / (math.factorial(b) * math.factorial(a - 2 * b)))
            if a - 2 * b:
                term = term * (2 * vectors[..., axis]) ** (a - 2 * b)
        total = total + term * _qpow(q, s / 2 - rank)

    singular = (q == 0) & (not vanishes) & (s < alpha.order)
    return np.where(singular, 0.0, total), singular


def _sample_directions(dim: int, count: int = 8) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    angles = 2 * math.pi * np.arange(count) / count
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def hormander_seminorms(
    s: float,
    orders: Sequence[MultiIndex | Sequence[int] | int],
    radii: Sequence[float],
    dim: int = 1,
) -> dict[tuple[int, ...], float]:
    """
    Sampled symbol-class seminorms of |xi|^s.

    For each alpha, Q_alpha = max |d^alpha |xi|^s| * |xi|^{|alpha| - s} over
    the sample points r * u, r in radii, u a unit direction. Membership in
    the class S^s means every Q_alpha stays bounded independently of r.

    Returns:
        Mapping from alpha entries to Q_alpha.
    """
    if any(r <= 0 for r in radii):
        raise SpectralError("Sample radii must be positive", "radii", list(radii))
    points = np.concatenate([r * _sample_directions(dim) for r in radii])
    norms = np.sqrt(np.sum(points**2, axis=-1))

    seminorms = {}
    for order in orders:
        alpha = MultiIndex.coerce(order, dim)
        values, _ = norm_power_derivative(points, s, alpha)
        seminorms[alpha.entries] = float(np.max(np.abs(values) * norms ** (alpha.order - s)))
        logger.debug("Seminorm of |xi|^%s for alpha=%s: %s", s, alpha.entries, seminorms[alpha.entries])
    return seminorms
