"""
Fractional heat semigroup, exponential time differencing and the Picard
local solver.

All stepping is done on raw FFT coefficients (unnormalized ``numpy.fft``
order); the linear part ``-(-Delta)^(beta/2)`` is diagonal there and is
integrated exactly.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .equation import EquationParams
from .errors import BlowUpSignal, LocalSolveFailure, ParameterError
from .grid import Field, Grid, check_finite, lp_norm
from .operators import frac_laplacian_symbol

__all__ = [
    "Propagator",
    "semigroup_apply",
    "phi1",
    "phi2",
    "etd_step",
    "step_controller",
    "PicardWorkspace",
    "PicardReport",
    "picard_solve_local",
]

SERIES_CUTOFF_PHI1 = 1e-4
# phi2 cancels twice as badly as phi1, so its series takes over earlier
SERIES_CUTOFF_PHI2 = 1e-2


def phi1(z: np.ndarray) -> np.ndarray:
    """``(e^z - 1) / z`` with a 6-term Taylor series near 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < SERIES_CUTOFF_PHI1
    zs = z[small]
    out[small] = 1 + zs / 2 * (1 + zs / 3 * (1 + zs / 4 * (1 + zs / 5 * (1 + zs / 6))))
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def phi2(z: np.ndarray) -> np.ndarray:
    """``(e^z - 1 - z) / z^2`` with a 6-term Taylor series near 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < SERIES_CUTOFF_PHI2
    zs = z[small]
    out[small] = 0.5 * (1 + zs / 3 * (1 + zs / 4 * (1 + zs / 5 * (1 + zs / 6 * (1 + zs / 7)))))
    zb = z[~small]
    out[~small] = (np.expm1(zb) - zb) / zb**2
    return out


@dataclass(frozen=True)
class _StepTables:
    decay: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray


class Propagator:
    """``S_beta(t)`` on one grid, with tables cached by step size.

    Tables are read-only once built, so a propagator can be shared; the
    cache itself is a small LRU keyed by ``t``.
    """

    def __init__(self, grid: Grid, beta: float, cache_size: int = 32):
        self.grid = grid
        self.beta = float(beta)
        self.symbol = frac_laplacian_symbol(grid, beta)
        self._cache: OrderedDict[float, _StepTables] = OrderedDict()
        self._cache_size = cache_size

    def tables(self, t: float) -> _StepTables:
        t = float(t)
        hit = self._cache.get(t)
        if hit is not None:
            self._cache.move_to_end(t)
            return hit
        z = -t * self.symbol
        decay = np.exp(z)
        # the zero mode must conserve mass exactly
        decay.flat[0] = 1.0
        tab = _StepTables(decay, phi1(z), phi2(z))
        for a in (tab.decay, tab.phi1, tab.phi2):
            a.setflags(write=False)
        self._cache[t] = tab
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return tab

    def decay(self, t: float) -> np.ndarray:
        """``exp(-t |xi|^beta)`` in FFT order."""
        if t < 0:
            raise ParameterError(f"semigroup time must be >= 0, got {t}")
        return self.tables(t).decay

    def apply(self, f: Field, t: float) -> Field:
        if f.grid != self.grid:
            raise ParameterError("field lives on a different grid")
        if t == 0:
            return f.copy()
        return Field(self.grid, np.fft.ifftn(self.decay(t) * np.fft.fftn(f.values)).real)


_PROPAGATORS: dict[tuple[Grid, float], Propagator] = {}


def _propagator(grid: Grid, beta: float) -> Propagator:
    key = (grid, float(beta))
    prop = _PROPAGATORS.get(key)
    if prop is None:
        if len(_PROPAGATORS) > 16:
            _PROPAGATORS.clear()
        prop = _PROPAGATORS[key] = Propagator(grid, beta)
    return prop


def semigroup_apply(f: Field, t: float, beta: float) -> Field:
    """``S_beta(t) f``, the solution of ``u_t + (-Delta)^(beta/2) u = 0`` at time ``t``."""
    if t < 0:
        raise ParameterError(f"semigroup time must be >= 0, got {t}")
    return _propagator(f.grid, beta).apply(f, t)


def etd_step(u: Field, dt: float, params: EquationParams, t: float = 0.0) -> Field:
    """One ETD2RK (Cox-Matthews) step of size ``dt``.

    Parameters
    ----------
    u : Field
        State at time ``t``.
    dt : float
        Step size, positive.
    params : EquationParams
    t : float
        Current time; only used to label a :class:`BlowUpSignal`.

    Raises
    ------
    BlowUpSignal
        ``|u|^p`` or the new state is not finite.
    """
    if not dt > 0:
        raise ParameterError(f"step size must be positive, got {dt}")
    grid = u.grid
    tab = _propagator(grid, params.beta).tables(dt)
    return Field(grid, _etd_values(u.values, dt, params, grid, tab, t))


def _etd_values(u, dt, params, grid, tab, t):
    u_hat = np.fft.fftn(u)
    n0 = params.source_hat(u, grid, t)
    a_hat = tab.decay * u_hat + dt * tab.phi1 * n0
    a = np.fft.ifftn(a_hat).real
    n1 = params.source_hat(a, grid, t)
    out = np.fft.ifftn(a_hat + dt * tab.phi2 * (n1 - n0)).real
    if not np.all(np.isfinite(out)):
        raise BlowUpSignal(t)
    return out


def step_controller(
    u: Field,
    dt_prev: float,
    params: EquationParams,
    dt_min: float = 1e-10,
    dt_max: float = 0.05,
    safety: float = 0.5,
    increment: float = 0.1,
    growth: float = 2.0,
) -> float:
    """Next step size from the size of the explicit nonlinear increment.

    ``dt = clamp(safety * increment / ||N|| * ||u||_inf^(1-p), dt_min, dt_max)``
    where ``||N||`` is the sup of the source multiplier, so one step adds at
    most ``safety * increment * ||u||_inf`` through the source.  When the
    source is active the step may grow by at most ``growth`` per call.
    A return value equal to ``dt_min`` means the caller should suspect
    blow-up.
    """
    if not 0 < dt_min < dt_max:
        raise ParameterError(f"need 0 < dt_min < dt_max, got {dt_min}, {dt_max}")
    norm = params.source_norm(u.grid)
    top = float(np.abs(u.values).max())
    if norm == 0.0 or top == 0.0:
        return dt_max
    with np.errstate(over="ignore", divide="ignore"):
        dt = safety * increment / norm * top ** (1.0 - params.p)
    if dt_prev > 0 and math.isfinite(dt_prev):
        dt = min(dt, growth * dt_prev)
    return float(min(max(dt, dt_min), dt_max))


# -- Picard iteration --------------------------------------------------------


@dataclass
class PicardReport:
    """Outcome of :func:`picard_solve_local`.

    ``differences`` are ``||u^(k+1) - u^k||_(E_T)`` for the accepted horizon;
    ``ratios`` are successive quotients of those above the rounding floor.
    """

    horizon: float
    requested_horizon: float
    halvings: int
    iterations: int
    converged: bool
    ball_radius: float
    s: float
    differences: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    contraction: float = 0.0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class PicardWorkspace:
    """Iterates of the Duhamel map on ``M + 1`` uniform sub-times of ``[0, T]``."""

    grid: Grid
    horizon: float
    ball_radius: float
    s: float
    M: int = 32
    iterates: list[np.ndarray] = field(default_factory=list)
    contraction: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.M + 1)

    def norm(self, traj: np.ndarray) -> float:
        """``E_T`` norm: ``sup_t (||u(t)||_s + ||u(t)||_inf)`` over the sub-times."""
        return max(lp_norm(v, self.s, self.grid) + float(np.abs(v).max()) for v in traj)

    def store(self, traj: np.ndarray) -> None:
        if self.norm(traj) > self.ball_radius:
            raise LocalSolveFailure(
                f"iterate left the ball of radius {self.ball_radius:.4g} at T={self.horizon:.4g}"
            )
        self.iterates.append(traj)
        del self.iterates[:-2]


def _duhamel_map(traj, u0_hat, params, grid, prop, dt, M):
    """Trapezoid-rule Duhamel map applied to a sampled trajectory."""
    src = np.stack([params.source_hat(v, grid) for v in traj])
    E = prop.decay(dt)
    out = np.empty_like(traj)
    # lin[m] = S(m dt) u0; acc[m] = int_0^{t_m} S(t_m - tau) N(tau) dtau by trapezoid
    lin = u0_hat.copy()
    inner = np.zeros_like(u0_hat)  # sum_{k<m} E^{m-k} w_k N_k, with w_0 = 1/2
    out[0] = np.fft.ifftn(lin).real
    for m in range(1, M + 1):
        lin = E * lin
        inner = E * (inner + (0.5 if m == 1 else 1.0) * src[m - 1])
        acc = dt * (inner + 0.5 * src[m])
        out[m] = np.fft.ifftn(lin + acc).real
    return out


def picard_solve_local(
    u0: Field,
    T: float,
    params: EquationParams,
    s: float,
    M: int = 32,
    max_halvings: int = 8,
    max_iter: int = 60,
    rtol: float = 1e-13,
    target_ratio: float = 0.5,
) -> tuple[list[Field], PicardReport]:
    """Fixed point of the Duhamel map on ``[0, T]`` by successive substitution.

    The horizon is halved (at most ``max_halvings`` times) whenever an
    iterate leaves the ball ``||u||_(E_T) <= R_ball`` or a successive
    difference ratio exceeds ``target_ratio``.

    Returns
    -------
    trajectory : list of Field
        ``u(t_m)`` at ``t_m = m T' / M`` for the accepted horizon ``T'``.
    report : PicardReport

    Raises
    ------
    LocalSolveFailure
        No contraction after ``max_halvings`` halvings.
    """
    if not T > 0:
        raise ParameterError(f"horizon must be positive, got {T}")
    if params.nonlinearity == "riesz":
        n, alpha, p = params.n, params.alpha, params.p
        p_min = n / (n - alpha)
        if not p > p_min:
            raise ParameterError(f"local theory needs p > n/(n-alpha) = {p_min:.6g}, got p={p}")
        s_lo, s_hi = n / (n - alpha), n * (p - 1) / alpha
        if not s_lo < s < s_hi:
            raise ParameterError(f"s must lie in ({s_lo:.6g}, {s_hi:.6g}), got {s}")
    grid = u0.grid
    check_finite(u0.values)
    radius = 2.0 * (lp_norm(u0, s) + lp_norm(u0, np.inf))
    prop = _propagator(grid, params.beta)
    u0_hat = np.fft.fftn(u0.values)

    horizon = float(T)
    last_error = ""
    for halvings in range(max_halvings + 1):
        ws = PicardWorkspace(grid, horizon, radius, s, M)
        dt = horizon / M
        traj = np.broadcast_to(u0.values, (M + 1,) + grid.shape).copy()
        diffs: list[float] = []
        ratios: list[float] = []
        ok = True
        try:
            ws.store(traj)
            for it in range(1, max_iter + 1):
                new = _duhamel_map(traj, u0_hat, params, grid, prop, dt, M)
                ws.store(new)
                d = ws.norm(new - traj)
                scale = max(ws.norm(new), np.finfo(float).tiny)
                traj = new
                floor = rtol * scale
                if diffs and diffs[-1] > 100 * floor and d > 10 * floor:
                    ratio = d / diffs[-1]
                    ratios.append(ratio)
                    # the first quotient compares against the initial guess, leave it out
                    if len(ratios) > 1 and ratio > target_ratio:
                        ok = False
                        last_error = f"contraction ratio {ratio:.3g} > {target_ratio}"
                        break
                diffs.append(d)
                if d <= floor:
                    break
            else:
                ok = False
                last_error = f"no convergence in {max_iter} iterations"
        except (LocalSolveFailure, BlowUpSignal) as exc:
            ok = False
            last_error = str(exc) or type(exc).__name__
        if ok:
            ws.contraction = max(ratios[1:], default=0.0)
            report = PicardReport(
                horizon=horizon,
                requested_horizon=float(T),
                halvings=halvings,
                iterations=len(diffs),
                converged=True,
                ball_radius=radius,
                s=s,
                differences=diffs,
                ratios=ratios,
                contraction=ws.contraction,
            )
            return [Field(grid, v) for v in traj], report
        horizon /= 2
    raise LocalSolveFailure(f"no contraction after {max_halvings} halvings: {last_error}")
