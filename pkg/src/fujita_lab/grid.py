"""
Periodic grids, discrete Fourier transforms, norms and dealiasing.

The whole space is replaced by the torus ``[-L/2, L/2)^n`` sampled at
``N`` points per axis.  Fourier coefficients are normalized so that the
zero mode equals the mean of the samples, and they are referred to the
physical coordinate ``x``, i.e.

    f(x_j) = sum_xi  coeff(xi) * exp(i xi . x_j)

so that ``cos(2 pi x / L)`` has coefficients ``1/2`` at ``xi = +-2 pi / L``
regardless of where the box starts.

Operators that only multiply by an even symbol do not need the phase
factor; they go through :func:`apply_symbol`, which works on raw arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import FieldOverflowError, ParameterError, SymmetryError

__all__ = [
    "Grid",
    "Field",
    "SpectralField",
    "transform_forward",
    "transform_backward",
    "lp_norm",
    "dealias",
    "apply_symbol",
    "check_finite",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L/2, L/2)^n``.

    Parameters
    ----------
    n : int
        Spatial dimension, 1 or 2.
    box_length : float
        Side length ``L`` of the periodic box.
    points_per_axis : int
        ``N``, a power of two not smaller than 8.
    """

    n: int
    box_length: float
    points_per_axis: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ParameterError(f"dimension n must be 1 or 2, got {self.n}")
        N = self.points_per_axis
        if int(N) != N or N < 8 or (int(N) & (int(N) - 1)) != 0:
            raise ParameterError(f"points_per_axis must be a power of two >= 8, got {N}")
        if not (np.isfinite(self.box_length) and self.box_length > 0):
            raise ParameterError(f"box_length must be positive, got {self.box_length}")
        object.__setattr__(self, "points_per_axis", int(N))
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def L(self) -> float:
        return self.box_length

    @property
    def N(self) -> int:
        return self.points_per_axis

    @property
    def h(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @property
    def volume(self) -> float:
        return self.box_length**self.n

    @cached_property
    def x_axis(self) -> np.ndarray:
        """Node coordinates along one axis, ``-L/2 + j h``."""
        return -0.5 * self.box_length + self.h * np.arange(self.N)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Open-mesh coordinate arrays, broadcastable to :attr:`shape`."""
        return tuple(np.meshgrid(*([self.x_axis] * self.n), indexing="ij", sparse=True))

    @cached_property
    def radius(self) -> np.ndarray:
        """``|x|`` at every node."""
        r2 = sum(c**2 for c in self.coords)
        return np.sqrt(np.broadcast_to(r2, self.shape))

    @cached_property
    def index_axis(self) -> np.ndarray:
        """Integer wave indices in FFT order: 0, 1, ..., N/2-1, -N/2, ..., -1."""
        return np.rint(np.fft.fftfreq(self.N, d=1.0 / self.N)).astype(int)

    @cached_property
    def k_axis(self) -> np.ndarray:
        """Angular wavenumbers ``2 pi j / L`` in FFT order."""
        return 2.0 * np.pi * self.index_axis / self.box_length

    @cached_property
    def knorm(self) -> np.ndarray:
        """``|xi|`` on the full wavenumber lattice (FFT order)."""
        grids = np.meshgrid(*([self.k_axis] * self.n), indexing="ij", sparse=True)
        return np.sqrt(np.broadcast_to(sum(g**2 for g in grids), self.shape))

    @cached_property
    def max_index(self) -> np.ndarray:
        """Largest ``|index|`` over the axes at each lattice point."""
        grids = np.meshgrid(*([np.abs(self.index_axis)] * self.n), indexing="ij", sparse=True)
        out = grids[0]
        for g in grids[1:]:
            out = np.maximum(out, g)
        return np.broadcast_to(out, self.shape)

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i xi L/2) = (-1)^j per axis: refers coefficients to x instead of x - x_0
        sign = np.where(self.index_axis % 2 == 0, 1.0, -1.0)
        grids = np.meshgrid(*([sign] * self.n), indexing="ij", sparse=True)
        out = grids[0]
        for g in grids[1:]:
            out = out * g
        return np.broadcast_to(out, self.shape)

    def sample(self, func) -> "Field":
        """Evaluate ``func(*coords)`` on the nodes and wrap it as a :class:`Field`."""
        values = np.broadcast_to(np.asarray(func(*self.coords), dtype=float), self.shape)
        return Field(self, np.array(values))

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape))

    def scaled(self, factor: float) -> "Grid":
        """Same point count on a box ``factor`` times as long."""
        return Grid(self.n, self.box_length * factor, self.N)


@dataclass
class Field:
    """Real samples of a function on a :class:`Grid`.

    ``overflowed`` marks a field captured in a blow-up state, the only
    situation where non-finite samples are tolerated.
    """

    grid: Grid
    values: np.ndarray
    overflowed: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            if values.size == self.grid.size:
                values = values.reshape(self.grid.shape)
            else:
                raise ParameterError(
                    f"field has {values.size} samples, grid needs {self.grid.size}"
                )
        self.values = values
        if not self.overflowed:
            check_finite(values)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.overflowed)

    def mean(self) -> float:
        return float(self.values.mean())

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)

    def __add__(self, other):
        if isinstance(other, Field):
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)

    def __mul__(self, other):
        if isinstance(other, Field):
            return Field(self.grid, self.values * other.values)
        return Field(self.grid, self.values * other)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return Field(self.grid, -self.values)


@dataclass
class SpectralField:
    """Fourier coefficients of a field, stored in FFT index order."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != self.grid.shape:
            raise ParameterError(f"coefficient array shape {coeffs.shape} != grid shape {self.grid.shape}")
        self.coeffs = coeffs

    def coeff(self, *index: int) -> complex:
        """Coefficient at integer wave index (negative indices allowed)."""
        return complex(self.coeffs[tuple(int(i) % self.grid.N for i in index)])

    def symmetry_defect(self) -> float:
        """Largest ``|c(-xi) - conj(c(xi))|`` relative to the largest coefficient."""
        flipped = self.coeffs
        for axis in range(self.grid.n):
            flipped = np.roll(np.flip(flipped, axis=axis), 1, axis=axis)
        scale = np.abs(self.coeffs).max()
        if scale == 0.0:
            return 0.0
        return float(np.abs(flipped - np.conj(self.coeffs)).max() / scale)


def check_finite(values: np.ndarray) -> None:
    """Raise :class:`FieldOverflowError` at the first non-finite sample."""
    finite = np.isfinite(values)
    if not finite.all():
        idx = np.unravel_index(int(np.argmin(finite.ravel())), values.shape)
        raise FieldOverflowError(idx)


def transform_forward(f: Field) -> SpectralField:
    """Discrete Fourier coefficients with ``coeff(0) = mean(f)``."""
    check_finite(f.values)
    g = f.grid
    coeffs = np.fft.fftn(f.values) / g.size * g._phase
    return SpectralField(g, coeffs)


def transform_backward(F: SpectralField, rtol: float = 1e-10) -> Field:
    """Inverse of :func:`transform_forward`.

    An imaginary residue below ``rtol`` (relative to the largest sample) is
    discarded; anything larger means the coefficients were not those of a
    real function and raises :class:`SymmetryError`.
    """
    g = F.grid
    values = np.fft.ifftn(F.coeffs * g._phase) * g.size
    scale = np.abs(values).max()
    if scale > 0 and np.abs(values.imag).max() > rtol * scale:
        raise SymmetryError(
            f"imaginary residue {np.abs(values.imag).max() / scale:.3e} exceeds {rtol:g}; "
            "coefficients are not conjugate symmetric"
        )
    return Field(g, values.real.copy())


def lp_norm(f: Field | np.ndarray, s: float, grid: Grid | None = None) -> float:
    """Rectangle-rule ``L^s`` norm, ``(h^n sum |f|^s)^(1/s)``; ``s = inf`` gives the max."""
    if isinstance(f, Field):
        values, grid = f.values, f.grid
    else:
        values = np.asarray(f)
        if grid is None:
            raise ParameterError("lp_norm on a raw array needs the grid")
    if s == np.inf:
        return float(np.abs(values).max())
    if not s >= 1:
        raise ParameterError(f"norm exponent must be >= 1 or inf, got {s}")
    a = np.abs(values)
    top = a.max()
    if top == 0.0:
        return 0.0
    # scale out the max so that large exponents do not overflow
    return float(top * (grid.cell_volume * np.sum((a / top) ** s)) ** (1.0 / s))


def dealias(F: SpectralField, fraction: float = 2.0 / 3.0) -> SpectralField:
    """Zero every coefficient with some ``|index| > fraction * N/2``."""
    if not 0 < fraction <= 1:
        raise ParameterError(f"dealias fraction must lie in (0, 1], got {fraction}")
    mask = dealias_mask(F.grid, fraction)
    return SpectralField(F.grid, np.where(mask, F.coeffs, 0.0))


def dealias_mask(grid: Grid, fraction: float) -> np.ndarray:
    return grid.max_index <= fraction * grid.N / 2


def apply_symbol(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Apply a real, even Fourier multiplier (FFT order) to real samples."""
    return np.fft.ifftn(symbol * np.fft.fftn(values)).real
