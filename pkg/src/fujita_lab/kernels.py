"""
Radial convolution kernels ``K(|x|)`` and their cell-regularized samples.

A kernel is a positive profile ``K(r)``, ``r > 0``, that may be singular but
locally integrable at the origin.  On a grid the origin sample is replaced
by the average of ``K(|x|)`` over the ball whose volume equals one cell, so
that the discrete kernel carries the right mass near the singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import KernelError, ParameterError
from .grid import Grid

__all__ = [
    "riesz_constant",
    "unit_ball_volume",
    "ConvolutionKernel",
    "load_kernel_table",
    "offset_radius",
]


def riesz_constant(n: int, alpha: float) -> float:
    """Normalization ``A_alpha = Gamma((n-alpha)/2) / (Gamma(alpha/2) pi^(n/2) 2^alpha)``."""
    if not 0 < alpha < n:
        raise ParameterError(f"Riesz order must lie in (0, n={n}), got {alpha}")
    return math.gamma((n - alpha) / 2) / (math.gamma(alpha / 2) * math.pi ** (n / 2) * 2**alpha)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def cell_ball_radius(grid: Grid) -> float:
    """Radius of the ball whose volume is one grid cell."""
    return (grid.cell_volume / unit_ball_volume(grid.n)) ** (1.0 / grid.n)


def offset_radius(grid: Grid) -> np.ndarray:
    """``|d|`` for every periodic displacement ``d``, laid out in FFT order."""
    d = grid.index_axis * grid.h
    mesh = np.meshgrid(*([d] * grid.n), indexing="ij", sparse=True)
    return np.sqrt(np.broadcast_to(sum(m**2 for m in mesh), grid.shape))


@dataclass(frozen=True, eq=False)
class ConvolutionKernel:
    """Positive radial kernel profile.

    Parameters
    ----------
    profile : callable
        ``K(r)`` for ``r > 0``, vectorized over numpy arrays.
    n : int
        Spatial dimension the kernel lives in.
    monotone_tail_radius : float
        ``R_0``: beyond it ``inf_{r<R} K(r) = K(R)`` is assumed.
    name : str
        Label used in reports.
    log_profile : callable, optional
        ``log K(r)``; lets asymptotic analysis go past float underflow.
    origin_average : callable, optional
        ``origin_average(rho)`` returns the mean of ``K(|x|)`` over the ball of
        radius ``rho``.  Computed by quadrature when absent.
    riesz_order : float, optional
        ``alpha`` when the profile is exactly the Riesz kernel.
    """

    profile: Callable[[np.ndarray], np.ndarray]
    n: int = 1
    monotone_tail_radius: float = 1.0
    name: str = "custom"
    log_profile: Callable[[np.ndarray], np.ndarray] | None = None
    origin_average: Callable[[float], float] | None = None
    riesz_order: float | None = None

    def __call__(self, r):
        return self.profile(np.asarray(r, dtype=float))

    def log(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.log_profile is not None:
            return np.asarray(self.log_profile(r), dtype=float)
        vals = np.asarray(self.profile(r), dtype=float)
        if np.any(vals <= 0):
            raise KernelError(f"kernel '{self.name}' has non-positive samples")
        return np.log(vals)

    # -- built-in profiles -------------------------------------------------

    @classmethod
    def riesz(cls, alpha: float, n: int = 1) -> "ConvolutionKernel":
        """``A_alpha r^(alpha - n)``."""
        A = riesz_constant(n, alpha)
        return cls(
            profile=lambda r: A * r ** (alpha - n),
            n=n,
            monotone_tail_radius=1.0,
            name=f"riesz({alpha:g})",
            log_profile=lambda r: math.log(A) + (alpha - n) * np.log(r),
            # int_0^rho A r^(alpha-n) |S^{n-1}| r^(n-1) dr / |B_rho| = A n/alpha rho^(alpha-n)
            origin_average=lambda rho: A * n / alpha * rho ** (alpha - n),
            riesz_order=float(alpha),
        )

    @classmethod
    def riesz_exponential_cutoff(cls, alpha: float, n: int = 1, length: float = 1.0) -> "ConvolutionKernel":
        """``A_alpha r^(alpha - n) exp(-r / length)``."""
        A = riesz_constant(n, alpha)
        return cls(
            profile=lambda r: A * r ** (alpha - n) * np.exp(-r / length),
            n=n,
            monotone_tail_radius=1.0,
            name=f"riesz_exp({alpha:g},{length:g})",
            log_profile=lambda r: math.log(A) + (alpha - n) * np.log(r) - r / length,
        )

    @classmethod
    def exponential(cls, n: int = 1, length: float = 1.0) -> "ConvolutionKernel":
        """``exp(-r / length)``."""
        return cls(
            profile=lambda r: np.exp(-r / length),
            n=n,
            monotone_tail_radius=1.0,
            name=f"exp({length:g})",
            log_profile=lambda r: -r / length,
            origin_average=None,
        )

    @classmethod
    def constant(cls, value: float, n: int = 1) -> "ConvolutionKernel":
        if not value > 0:
            raise KernelError("constant kernel must be positive")
        return cls(
            profile=lambda r: np.full_like(np.asarray(r, dtype=float), value),
            n=n,
            monotone_tail_radius=1.0,
            name=f"constant({value:g})",
            log_profile=lambda r: np.full_like(np.asarray(r, dtype=float), math.log(value)),
            origin_average=lambda rho: value,
        )

    @classmethod
    def dirac(cls, n: int = 1) -> "ConvolutionKernel":
        """All mass in the origin cell; convolution is the identity on the grid."""
        vol = unit_ball_volume(n)
        return cls(
            profile=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            n=n,
            monotone_tail_radius=math.inf,
            name="dirac",
            origin_average=lambda rho: 1.0 / (vol * rho**n),
        )

    # -- sampling ----------------------------------------------------------

    def ball_average(self, rho: float) -> float:
        if self.origin_average is not None:
            return float(self.origin_average(rho))
        n = self.n
        surface = n * unit_ball_volume(n)
        val, _ = integrate.quad(lambda r: float(self.profile(np.asarray(r))) * r ** (n - 1), 0.0, rho, limit=200)
        return surface * val / (unit_ball_volume(n) * rho**n)

    def samples(self, grid: Grid) -> np.ndarray:
        """Cell-regularized samples in FFT displacement order (origin at index 0)."""
        return _cached_samples(self, grid)

    def symbol(self, grid: Grid) -> np.ndarray:
        """Discrete Fourier symbol of circular convolution ``h^n sum_j K(x_i - x_j) f_j``."""
        return _cached_symbol(self, grid)

    def check(self, grid: Grid, atol: float = 1e-10) -> None:
        """Verify positivity and the tail hypothesis on the sampled radii."""
        if grid.n != self.n:
            raise KernelError(f"kernel lives in n={self.n}, grid has n={grid.n}")
        k = self.samples(grid)
        if np.any(~np.isfinite(k)) or np.any(k <= 0):
            raise KernelError(f"kernel '{self.name}' is not positive on the grid")
        r = offset_radius(grid).ravel()
        kv = k.ravel()
        order = np.argsort(r, kind="stable")
        r, kv = r[order], kv[order]
        pos = r > 0
        r, kv = r[pos], kv[pos]
        running_min = np.minimum.accumulate(kv)
        tail = r > self.monotone_tail_radius
        bad = tail & (np.abs(running_min - kv) > atol * np.maximum(1.0, np.abs(kv)))
        if np.any(bad):
            R = float(r[np.argmax(bad)])
            raise KernelError(
                f"kernel '{self.name}' violates inf_(0,R) K = K(R) at R={R:g} "
                f"(beyond R_0={self.monotone_tail_radius:g})"
            )


@lru_cache(maxsize=64)
def _cached_samples(kernel: ConvolutionKernel, grid: Grid) -> np.ndarray:
    r = offset_radius(grid)
    out = np.empty(grid.shape)
    pos = r > 0
    out[pos] = kernel.profile(r[pos])
    out[~pos] = kernel.ball_average(cell_ball_radius(grid))
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _cached_symbol(kernel: ConvolutionKernel, grid: Grid) -> np.ndarray:
    sym = (np.fft.fftn(_cached_samples(kernel, grid)) * grid.cell_volume).real
    sym.setflags(write=False)
    return sym


def load_kernel_table(path: str | Path, n: int = 1, monotone_tail_radius: float = 1.0) -> ConvolutionKernel:
    """Kernel from a two-column ``radius value`` text table.

    Values are interpolated linearly in log-log space and extrapolated
    along the first and last segments.
    """
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise KernelError(f"{path}: expected two columns (radius, value), found {data.shape[1]}")
    r, k = data[:, 0], data[:, 1]
    if np.any(r <= 0) or np.any(k <= 0):
        raise KernelError(f"{path}: radii and kernel values must be positive")
    order = np.argsort(r)
    lr, lk = np.log(r[order]), np.log(k[order])
    if lr.size < 2:
        raise KernelError(f"{path}: need at least two rows")

    def log_profile(x):
        lx = np.log(np.asarray(x, dtype=float))
        out = np.interp(lx, lr, lk)
        lo, hi = lx < lr[0], lx > lr[-1]
        s0 = (lk[1] - lk[0]) / (lr[1] - lr[0])
        s1 = (lk[-1] - lk[-2]) / (lr[-1] - lr[-2])
        out = np.where(lo, lk[0] + s0 * (lx - lr[0]), out)
        out = np.where(hi, lk[-1] + s1 * (lx - lr[-1]), out)
        return out

    return ConvolutionKernel(
        profile=lambda x: np.exp(log_profile(x)),
        n=n,
        monotone_tail_radius=monotone_tail_radius,
        name=f"table({Path(path).name})",
        log_profile=log_profile,
    )

