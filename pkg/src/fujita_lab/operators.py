"""
Nonlocal operators as Fourier multipliers, plus real-space oracles.

* fractional Laplacian ``(-Delta)^(beta/2)``, symbol ``|xi|^beta``;
* Riesz potential ``I_alpha``, symbol ``|xi|^(-alpha)`` or circular
  convolution with the cell-regularized kernel ``A_alpha |x|^(alpha-n)``;
* general radial convolutions ``K * f``;
* a principal-value quadrature of the singular-integral form of
  ``(-Delta)^s`` in one dimension, used to cross-check the multiplier;
* the residual of Ju's pointwise inequality for powers of a cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Literal

import numpy as np
from scipy import integrate

from .errors import ParameterError
from .grid import Field, Grid, apply_symbol, check_finite
from .kernels import ConvolutionKernel, riesz_constant

__all__ = [
    "FourierMultiplier",
    "RieszKernel",
    "FractionalLaplacianPV",
    "PVResult",
    "frac_laplacian_symbol",
    "frac_laplacian_apply",
    "riesz_zero_mode",
    "riesz_apply",
    "kernel_convolve",
    "frac_laplacian_pv",
    "ju_residual",
]


@dataclass
class FourierMultiplier:
    """Real symbol on the wavenumber lattice of ``grid`` (FFT order).

    ``zero_mode`` is ``"zero"`` or a float that replaces ``symbol[0]``.
    """

    grid: Grid
    symbol: np.ndarray
    zero_mode: str | float = "zero"

    def __post_init__(self):
        sym = np.array(self.symbol, dtype=float)
        if sym.shape != self.grid.shape:
            raise ParameterError("symbol shape does not match grid")
        origin = (0,) * self.grid.n
        sym[origin] = 0.0 if self.zero_mode == "zero" else float(self.zero_mode)
        if not np.all(np.isfinite(sym)):
            raise ParameterError("multiplier symbol must be finite at every wavenumber")
        self.symbol = sym

    def __call__(self, f: Field) -> Field:
        return Field(self.grid, apply_symbol(f.values, self.symbol))

    def apply(self, values: np.ndarray) -> np.ndarray:
        return apply_symbol(values, self.symbol)

    def compose(self, other: "FourierMultiplier") -> "FourierMultiplier":
        return FourierMultiplier(self.grid, self.symbol * other.symbol, float(self.symbol.flat[0] * other.symbol.flat[0]))

    @property
    def sup(self) -> float:
        return float(np.abs(self.symbol).max())


def _check_beta(beta: float) -> None:
    if not 0 < beta <= 2:
        raise ParameterError(f"fractional order beta must lie in (0, 2], got {beta}")


@lru_cache(maxsize=128)
def frac_laplacian_symbol(grid: Grid, beta: float) -> np.ndarray:
    _check_beta(beta)
    sym = grid.knorm**beta
    sym.setflags(write=False)
    return sym


def frac_laplacian_apply(f: Field, beta: float) -> Field:
    """``(-Delta)^(beta/2) f`` via the symbol ``|xi|^beta``; constants map to zero."""
    _check_beta(beta)
    check_finite(f.values)
    return Field(f.grid, apply_symbol(f.values, frac_laplacian_symbol(f.grid, beta)))


@lru_cache(maxsize=128)
def riesz_zero_mode(grid: Grid, alpha: float) -> float:
    """``m_0 = int_box A_alpha |x|^(alpha-n) dx`` over the periodic box.

    In 1-D this is ``2 A (L/2)^alpha / alpha``.  In 2-D, polar coordinates over
    the eight triangles of the square give
    ``(8 A / alpha) (L/2)^alpha int_0^(pi/4) cos(theta)^(-alpha) d theta``,
    i.e. the inscribed disk plus the corners.
    """
    n = grid.n
    A = riesz_constant(n, alpha)
    half = grid.box_length / 2
    if n == 1:
        return 2.0 * A * half**alpha / alpha
    angular, _ = integrate.quad(lambda th: math.cos(th) ** (-alpha), 0.0, math.pi / 4, epsabs=1e-14, epsrel=1e-12)
    return 8.0 * A / alpha * half**alpha * angular


@dataclass(frozen=True)
class RieszKernel:
    """Riesz potential of order ``alpha`` in dimension ``n``.

    ``mode="multiplier"`` applies ``|xi|^(-alpha)`` with the zero mode set by
    ``zero_mode`` (``"explicit"`` uses :func:`riesz_zero_mode`, ``"zero"``
    gives the mean-free potential).  ``mode="sampled_kernel"`` convolves with
    the cell-regularized kernel samples.
    """

    alpha: float
    n: int = 1
    mode: Literal["multiplier", "sampled_kernel"] = "multiplier"
    zero_mode: str | float = "explicit"

    def __post_init__(self):
        if not 0 < self.alpha < self.n:
            raise ParameterError(f"Riesz order alpha must lie in (0, n={self.n}), got {self.alpha}")
        if self.mode not in ("multiplier", "sampled_kernel"):
            raise ParameterError(f"unknown Riesz mode {self.mode!r}")

    @property
    def A_alpha(self) -> float:
        return riesz_constant(self.n, self.alpha)

    def zero_mode_value(self, grid: Grid) -> float:
        if self.zero_mode == "explicit":
            return riesz_zero_mode(grid, self.alpha)
        if self.zero_mode == "zero":
            return 0.0
        return float(self.zero_mode)

    def as_convolution_kernel(self) -> ConvolutionKernel:
        return _riesz_profile(self.alpha, self.n)

    def symbol(self, grid: Grid) -> np.ndarray:
        return _riesz_symbol(self, grid)

    def multiplier(self, grid: Grid) -> FourierMultiplier:
        sym = self.symbol(grid)
        return FourierMultiplier(grid, sym, float(sym.flat[0]))


@lru_cache(maxsize=32)
def _riesz_profile(alpha: float, n: int) -> ConvolutionKernel:
    return ConvolutionKernel.riesz(alpha, n)


@lru_cache(maxsize=128)
def _riesz_symbol(kernel: RieszKernel, grid: Grid) -> np.ndarray:
    if grid.n != kernel.n:
        raise ParameterError(f"Riesz kernel has n={kernel.n}, grid has n={grid.n}")
    if kernel.mode == "sampled_kernel":
        sym = np.array(kernel.as_convolution_kernel().symbol(grid))
    else:
        k = grid.knorm
        with np.errstate(divide="ignore"):
            sym = np.where(k > 0, k ** (-kernel.alpha), 0.0)
        sym[(0,) * grid.n] = kernel.zero_mode_value(grid)
    sym.setflags(write=False)
    return sym


def riesz_apply(f: Field, kernel: RieszKernel) -> Field:
    """``I_alpha f`` in the kernel's mode."""
    check_finite(f.values)
    return Field(f.grid, apply_symbol(f.values, kernel.symbol(f.grid)))


def kernel_convolve(f: Field, K: ConvolutionKernel, validate: bool = False) -> Field:
    """Circular convolution ``h^n sum_j K(|x_i - x_j|) f_j`` computed spectrally."""
    if validate:
        K.check(f.grid)
    check_finite(f.values)
    return Field(f.grid, apply_symbol(f.values, K.symbol(f.grid)))


# -- principal-value oracle ---------------------------------------------------


@dataclass(frozen=True)
class FractionalLaplacianPV:
    """Singular-integral form of ``(-Delta)^s`` in one dimension.

    The constant ``4^s Gamma(n/2+s) / (pi^(n/2) Gamma(-s))`` is negative for
    ``s`` in (0, 1); ``signed_constant`` keeps it as written and ``constant``
    is its magnitude, used with the integrand ``f(x) - f(y)`` so that
    ``(-Delta)^s cos(kx) = |k|^(2s) cos(kx)``.
    """

    s: float
    n: int = 1
    cutoff: float = 1e-2
    outer: float = 200.0

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ParameterError(f"p.v. order s must lie in (0, 1), got {self.s}")

    @property
    def signed_constant(self) -> float:
        s, n = self.s, self.n
        return 4**s * math.gamma(n / 2 + s) / (math.pi ** (n / 2) * math.gamma(-s))

    @property
    def constant(self) -> float:
        return abs(self.signed_constant)


@dataclass
class PVResult:
    value: np.ndarray | float
    truncation_warning: bool = False
    raw: list = field(default_factory=list)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _panel_nodes(a: float, b: float, fine_until: float, width: float):
    """Gauss-Legendre nodes on [a, b]: geometric panels up to ``fine_until``, then uniform."""
    edges = []
    if fine_until > a:
        m = max(4, int(math.ceil(4 * math.log2(fine_until / a))))
        edges.extend(np.geomspace(a, min(fine_until, b), m + 1))
    if b > (edges[-1] if edges else a):
        start = edges[-1] if edges else a
        m = max(1, int(math.ceil((b - start) / width)))
        uni = np.linspace(start, b, m + 1)
        edges.extend(uni[1:] if edges else uni)
    edges = np.asarray(edges)
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    z = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return z, w


def frac_laplacian_pv(
    f: Callable[[np.ndarray], np.ndarray],
    s: float,
    x,
    h: float = 1e-2,
    support: float | None = None,
    outer: float = 200.0,
    far_mean: float = 0.0,
    d2f: Callable[[np.ndarray], np.ndarray] | None = None,
    panel_width: float | None = None,
) -> PVResult:
    """Quadrature of ``C p.v. int (f(x) - f(y)) / |x - y|^(1+2s) dy`` in 1-D.

    The integral is folded to ``int_0^inf (2 f(x) - f(x+z) - f(x-z)) z^(-1-2s) dz``.
    On ``[0, eps]`` the integrand is replaced by its Taylor term ``-f''(x) z^(1-2s)``;
    ``[eps, Z]`` is done by composite Gauss-Legendre; beyond ``Z`` the function
    is replaced by ``far_mean``.  ``eps`` runs over ``h, 2h, 4h`` and the three
    values are Richardson-extrapolated (error terms ``eps^(4-2s)``, ``eps^(6-2s)``).

    Parameters
    ----------
    f : callable
        Vectorized function of one variable.
    s : float
        Order in (0, 1).
    x : float or array
        Evaluation points.
    support : float, optional
        If ``f`` vanishes for ``|y| > support`` the tail is exact and ``Z`` is
        chosen per point as ``|x| + support``.
    far_mean : float
        Average of ``f`` at infinity (non-zero for periodic extensions).
    d2f : callable, optional
        Second derivative; otherwise a five-point stencil of step ``eps`` is used.
    """
    op = FractionalLaplacianPV(s, 1, h, outer)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    fx = np.asarray(f(xs), dtype=float)
    if support is not None:
        Z = float(np.max(np.abs(xs)) + support)
    else:
        Z = float(outer)
    width = panel_width if panel_width is not None else max(h, 0.25)
    estimates = []
    for eps in (h, 2 * h, 4 * h):
        if d2f is not None:
            f2 = np.asarray(d2f(xs), dtype=float)
        else:
            f2 = (-f(xs + 2 * eps) + 16 * f(xs + eps) - 30 * fx + 16 * f(xs - eps) - f(xs - 2 * eps)) / (12 * eps**2)
        inner = -f2 * eps ** (2 - 2 * s) / (2 - 2 * s)
        z, w = _panel_nodes(eps, Z, fine_until=min(1.0, Z), width=width)
        total = np.empty_like(xs)
        # chunk over x to bound memory
        step = max(1, 2_000_000 // max(1, z.size))
        for i in range(0, xs.size, step):
            xi = xs[i : i + step, None]
            g = 2 * fx[i : i + step, None] - f(xi + z[None, :]) - f(xi - z[None, :])
            total[i : i + step] = (g * (w * z ** (-1 - 2 * s))[None, :]).sum(axis=1)
        tail = 2 * (fx - far_mean) * Z ** (-2 * s) / (2 * s)
        estimates.append(inner + total + tail)
    e1, e2, e4 = estimates
    a = 4 - 2 * s
    b = 6 - 2 * s
    r1 = (2**a * e1 - e2) / (2**a - 1)
    r2 = (2**a * e2 - e4) / (2**a - 1)
    value = op.constant * (2**b * r1 - r2) / (2**b - 1)
    warn = False
    if support is None:
        probe = np.concatenate([xs + Z, xs - Z, xs + 1.37 * Z, xs - 1.37 * Z])
        far = np.abs(np.asarray(f(probe), dtype=float) - far_mean).max()
        warn = bool(far > 1e-8 * max(1.0, np.abs(fx).max()))
    out = value if np.ndim(x) else float(value[0])
    return PVResult(out, warn, [op.constant * e for e in estimates])


def ju_residual(phi: Field, ell: float, beta: float) -> Field:
    """``ell phi^(ell-1) (-Delta)^(beta/2) phi - (-Delta)^(beta/2) (phi^ell)``.

    Non-negative wherever Ju's inequality holds; callers compare the minimum
    with ``-tol * max|(-Delta)^(beta/2) phi|``.
    """
    if not ell > 1:
        raise ParameterError(f"Ju exponent must exceed 1, got {ell}")
    v = np.clip(phi.values, 0.0, None)
    lap = frac_laplacian_apply(Field(phi.grid, v), beta).values
    lap_pow = frac_laplacian_apply(Field(phi.grid, v**ell), beta).values
    return Field(phi.grid, ell * v ** (ell - 1) * lap - lap_pow)
