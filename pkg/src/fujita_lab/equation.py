"""Equation parameters and the nonlinear source ``N(u)``."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import BlowUpSignal, ParameterError
from .grid import Grid, dealias_mask
from .kernels import ConvolutionKernel
from .operators import RieszKernel, frac_laplacian_symbol

__all__ = ["EquationParams"]

Nonlinearity = Literal["riesz", "kernel", "local"]


@dataclass(frozen=True)
class EquationParams:
    """``u_t + (-Delta)^(beta/2) u = coupling * N(u)``.

    ``N(u)`` is ``I_alpha(|u|^p)`` (``nonlinearity="riesz"``), ``K * |u|^p``
    (``"kernel"``) or ``|u|^p`` (``"local"``, the ``alpha -> 0`` limit).
    """

    n: int = 1
    beta: float = 2.0
    p: float = 3.0
    nonlinearity: Nonlinearity = "riesz"
    alpha: float | None = 0.5
    kernel: ConvolutionKernel | None = field(default=None, compare=False)
    riesz_mode: Literal["multiplier", "sampled_kernel"] = "multiplier"
    zero_mode: str | float = "explicit"
    coupling: float = 1.0
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ParameterError(f"n must be 1 or 2, got {self.n}")
        if not 0 < self.beta <= 2:
            raise ParameterError(f"beta must lie in (0, 2], got {self.beta}")
        if not self.p > 1:
            raise ParameterError(f"p must exceed 1, got {self.p}")
        if self.nonlinearity == "riesz":
            if self.alpha is None or not 0 < self.alpha < self.n:
                raise ParameterError(f"alpha must lie in (0, n={self.n}), got {self.alpha}")
        elif self.nonlinearity == "kernel":
            if self.kernel is None:
                raise ParameterError("kernel nonlinearity needs a ConvolutionKernel")
            if self.kernel.n != self.n:
                raise ParameterError(f"kernel dimension {self.kernel.n} != n={self.n}")
        elif self.nonlinearity == "local":
            object.__setattr__(self, "alpha", 0.0)
        else:
            raise ParameterError(f"unknown nonlinearity {self.nonlinearity!r}")

    @property
    def riesz(self) -> RieszKernel | None:
        if self.nonlinearity != "riesz":
            return None
        return RieszKernel(self.alpha, self.n, self.riesz_mode, self.zero_mode)

    @property
    def has_exponents(self) -> bool:
        return self.nonlinearity in ("riesz", "local")

    def source_symbol(self, grid: Grid) -> np.ndarray:
        """``coupling * symbol(N) * dealias mask`` in FFT order."""
        return _source_symbol(self, grid)

    def linear_symbol(self, grid: Grid) -> np.ndarray:
        return frac_laplacian_symbol(grid, self.beta)

    def source_norm(self, grid: Grid) -> float:
        """Sup of the source multiplier, bounding ``||N(u)||_inf / ||u||_inf^p`` for positive kernels."""
        return float(np.abs(self.source_symbol(grid)).max())

    def source_hat(self, u: np.ndarray, grid: Grid, t: float = 0.0) -> np.ndarray:
        """Fourier transform (FFT order, unnormalized) of ``N(u)``.

        Raises :class:`BlowUpSignal` if ``|u|^p`` overflows.
        """
        with np.errstate(over="ignore", invalid="ignore"):
            up = np.abs(u) ** self.p
        if not np.all(np.isfinite(up)):
            raise BlowUpSignal(t)
        return self.source_symbol(grid) * np.fft.fftn(up)

    def source(self, u: np.ndarray, grid: Grid) -> np.ndarray:
        return np.fft.ifftn(self.source_hat(u, grid)).real

    def describe(self) -> dict:
        out = {
            "n": self.n,
            "beta": self.beta,
            "p": self.p,
            "nonlinearity": self.nonlinearity,
            "alpha": self.alpha,
            "riesz_mode": self.riesz_mode,
            "zero_mode": self.zero_mode,
            "coupling": self.coupling,
            "dealias_fraction": self.dealias_fraction,
        }
        if self.kernel is not None:
            out["kernel"] = self.kernel.name
        return out

    def replace(self, **changes) -> "EquationParams":
        from dataclasses import replace

        return replace(self, **changes)


@lru_cache(maxsize=64)
def _source_symbol(params: EquationParams, grid: Grid) -> np.ndarray:
    if grid.n != params.n:
        raise ParameterError(f"grid dimension {grid.n} != equation dimension {params.n}")
    if params.nonlinearity == "riesz":
        sym = np.array(params.riesz.symbol(grid))
    elif params.nonlinearity == "kernel":
        sym = np.array(params.kernel.symbol(grid))
    else:
        sym = np.ones(grid.shape)
    sym = params.coupling * sym * dealias_mask(grid, params.dealias_fraction)
    sym.setflags(write=False)
    return sym
