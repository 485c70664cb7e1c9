"""
Test-function (capacity) estimates evaluated on stored trajectories.

With ``psi(t, x) = phi_R(x)^l phi_T(t)^l``, ``l = (2p-1)/(p-1)``, a
nonnegative solution satisfies

    int int N(u) psi + int u0 phi_R^l  <=  J1 I^(1/p) + J2 J^(1/p)

where ``I`` and ``J`` are the integrals of ``u^p psi`` over ``[0, T]`` and
``[T/2, T]``, and ``J1``, ``J2`` depend only on the test function.  For the
Riesz source the first term is bounded below by ``C R^alpha I``.  This module
computes every term with the solver's own operators so the chain can be
audited numerically, and fits the scaling laws of ``J1``, ``J2`` and ``I``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy import integrate, stats

from .equation import EquationParams
from .errors import KernelError, NeedsDenserTrajectoryError, ParameterError, RegressionError
from .grid import Field, Grid
from .kernels import ConvolutionKernel, riesz_constant, unit_ball_volume
from .operators import frac_laplacian_apply, ju_residual

__all__ = [
    "cutoff_profile",
    "cutoff_derivative",
    "TestFunction",
    "build_test_function",
    "Trajectory",
    "CapacityReport",
    "ScalingFit",
    "CapacityVerdict",
    "capacity_integrals",
    "fit_power_law",
    "test_function_scaling",
    "predicted_exponents",
    "reports_to_csv",
    "verify_capacity_inequality",
    "ConditionResult",
    "KernelConditionReport",
    "kernel_limit_conditions",
    "mass_functional",
    "CAPACITY_CSV_COLUMNS",
]

CUSHION = 1.05
CAPACITY_CSV_COLUMNS = ("R", "T", "J1", "J2", "I", "J", "lhs", "rhs")


def _f(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _df(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos]) / s[pos] ** 2
    return out


def cutoff_profile(r) -> np.ndarray:
    """Smooth non-increasing ``Phi`` with ``Phi = 1`` on ``r <= 1/2`` and ``Phi = 0`` on ``r >= 1``."""
    r = np.asarray(r, dtype=float)
    a, b = _f(1.0 - r), _f(r - 0.5)
    return a / (a + b)


def cutoff_derivative(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    a, b = _f(1.0 - r), _f(r - 0.5)
    da, db = -_df(1.0 - r), _df(r - 0.5)
    return (da * b - a * db) / (a + b) ** 2


@lru_cache(maxsize=256)
def _time_moments(p: float) -> tuple[float, float]:
    """``int_0^1 Phi^l`` and ``int_{1/2}^1 Phi |Phi'|^(p/(p-1))``."""
    ell = (2 * p - 1) / (p - 1)
    pc = p / (p - 1)
    m1, _ = integrate.quad(lambda s: float(cutoff_profile(s)) ** ell, 0.0, 1.0, points=[0.5], limit=200)
    m2, _ = integrate.quad(
        lambda s: float(cutoff_profile(s)) * abs(float(cutoff_derivative(s))) ** pc, 0.5, 1.0, limit=200
    )
    return m1, m2


@dataclass
class TestFunction:
    """``phi_R(x) = Phi(|x|/R)``, ``phi_T(t) = Phi(t/T)`` and derived fields on a grid."""

    __test__ = False  # not a pytest class

    p: float
    R: float
    T: float
    beta: float
    grid: Grid
    ell: float
    phi_R: Field
    phi_R_ell: Field
    lap_phi_R: Field
    lap_phi_R_ell: Field
    ball: np.ndarray = field(repr=False)
    inner_ball: np.ndarray = field(repr=False)

    def phi_T(self, t) -> np.ndarray:
        return cutoff_profile(np.asarray(t, dtype=float) / self.T)

    def dphi_T(self, t) -> np.ndarray:
        return cutoff_derivative(np.asarray(t, dtype=float) / self.T) / self.T

    def dphi_T_ell(self, t) -> np.ndarray:
        """``d/dt (phi_T^l) = l phi_T^(l-1) phi_T'``."""
        return self.ell * self.phi_T(t) ** (self.ell - 1) * self.dphi_T(t)

    def J1(self) -> float:
        p, g = self.p, self.grid
        pc = p / (p - 1)
        m1, _ = _time_moments(p)
        space = float(np.sum((self.phi_R.values * np.abs(self.lap_phi_R.values) ** pc)[self.ball]) * g.cell_volume)
        return self.ell * (self.T * m1) ** ((p - 1) / p) * space ** ((p - 1) / p)

    def J2(self) -> float:
        p, g = self.p, self.grid
        pc = p / (p - 1)
        _, m2 = _time_moments(p)
        space = float(np.sum(self.phi_R_ell.values[self.ball]) * g.cell_volume)
        return self.ell * space ** ((p - 1) / p) * (self.T ** (1 - pc) * m2) ** ((p - 1) / p)

    def ju_min(self) -> float:
        """Minimum of the Ju residual relative to ``max |l phi^(l-1) (-Delta)^(beta/2) phi|``."""
        res = ju_residual(self.phi_R, self.ell, self.beta).values
        v = self.phi_R.values
        scale = float(np.abs(self.ell * v ** (self.ell - 1) * self.lap_phi_R.values).max())
        return float(res.min() / scale) if scale > 0 else 0.0


def build_test_function(
    p: float, R: float, T: float, grid: Grid, beta: float, padding: float = 4.0
) -> TestFunction:
    """Sample the cutoffs on ``grid`` and apply ``(-Delta)^(beta/2)`` spectrally.

    Raises
    ------
    ParameterError
        The box is shorter than ``padding * R``, ``R < 4 h``, or ``T <= 0``.
    """
    if not p > 1:
        raise ParameterError(f"p must exceed 1, got {p}")
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    if R < 4 * grid.h:
        raise ParameterError(f"R={R} is below four grid spacings (h={grid.h:g})")
    if grid.L < padding * R * (1 - 1e-12):
        raise ParameterError(f"box length {grid.L:g} is below {padding:g} R = {padding * R:g}")
    ell = (2 * p - 1) / (p - 1)
    r = grid.radius
    phi = Field(grid, cutoff_profile(r / R))
    phi_ell = Field(grid, phi.values**ell)
    return TestFunction(
        p=float(p),
        R=float(R),
        T=float(T),
        beta=float(beta),
        grid=grid,
        ell=ell,
        phi_R=phi,
        phi_R_ell=phi_ell,
        lap_phi_R=frac_laplacian_apply(phi, beta),
        lap_phi_R_ell=frac_laplacian_apply(phi_ell, beta),
        ball=r <= R,
        inner_ball=r <= R / 2,
    )


# -- trajectories ------------------------------------------------------------


@dataclass
class Trajectory:
    """Snapshot times and the stored fields ``u(t_k)``."""

    grid: Grid
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.times.size,) + self.grid.shape:
            raise ParameterError("snapshot array does not match times and grid")

    @classmethod
    def from_run(cls, result, grid: Grid | None = None) -> "Trajectory":
        if result.snapshots is None or len(result.snapshot_times) == 0:
            raise NeedsDenserTrajectoryError("run stored no field snapshots; set snapshot_interval")
        if grid is None:
            grid = Grid(**result.grid)
        return cls(grid, result.snapshot_times, result.snapshots)

    def window(self, T: float, min_intervals: int = 32) -> tuple[np.ndarray, np.ndarray]:
        """Snapshots on ``[0, T)``; checks the cadence is fine enough for ``T``."""
        cadence = T / min_intervals
        t = self.times
        if t.size == 0 or t[0] != 0.0:
            raise NeedsDenserTrajectoryError(f"trajectory must start at t=0 (need cadence <= {cadence:.6g})")
        if t[-1] < T * (1 - 1e-9) and not (t[-1] >= T - 1e-12):
            raise NeedsDenserTrajectoryError(
                f"trajectory ends at t={t[-1]:.6g} < T={T:.6g}; store snapshots up to T with cadence <= {cadence:.6g}"
            )
        keep = t < T * (1 - 1e-12)
        tk = t[keep]
        gaps = np.diff(np.append(tk, T))
        if gaps.max() > cadence * (1 + 1e-9):
            raise NeedsDenserTrajectoryError(
                f"snapshot spacing {gaps.max():.6g} too coarse for T={T:.6g}; need cadence <= {cadence:.6g}"
            )
        return tk, self.values[keep]


def _trapz_window(t: np.ndarray, f: np.ndarray, a: float, b: float) -> float:
    """Trapezoid rule for the piecewise-linear interpolant of ``(t, f)`` over ``[a, b]``."""
    inside = (t > a) & (t < b)
    tt = np.concatenate([[a], t[inside], [b]])
    ff = np.concatenate([[np.interp(a, t, f)], f[inside], [np.interp(b, t, f)]])
    return float(np.sum(0.5 * (ff[1:] + ff[:-1]) * np.diff(tt)))


@dataclass
class CapacityReport:
    """Terms of the test-function inequality at one ``(R, T)``.

    ``lhs`` is ``riesz_lower + data_term`` (the form with the explicit lower
    bound), ``lhs_full`` uses the computed source term itself, and ``rhs`` is
    ``J1 I^(1/p) + J2 J^(1/p)``.
    """

    R: float
    T: float
    p: float
    J1: float
    J2: float
    I: float
    J: float
    source_term: float
    riesz_lower: float
    data_term: float
    lhs: float
    lhs_full: float
    rhs: float
    identity_residual: float
    ju_min: float
    holds: bool
    lower_bound_holds: bool

    def to_dict(self) -> dict:
        return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v)) for k, v in asdict(self).items()}


def _lower_bound_constant(params: EquationParams, R: float) -> float:
    """Pointwise lower bound of the source kernel on ``|x| <= R/2``, ``|y| <= R``, times ``meas(B_{R/2})``."""
    n = params.n
    meas = unit_ball_volume(n) * (R / 2) ** n
    if params.nonlinearity == "riesz":
        a = params.alpha
        return params.coupling * riesz_constant(n, a) * meas * R ** (-n) * 2.0 ** (-(n - a)) * R**a
    if params.nonlinearity == "kernel":
        return params.coupling * meas * float(params.kernel(2 * R))
    return math.nan


def capacity_integrals(
    traj: Trajectory,
    tf: TestFunction,
    params: EquationParams,
    min_intervals: int = 32,
) -> CapacityReport:
    """Evaluate every term of the inequality on a stored nonnegative trajectory.

    Time integrals use the trapezoid rule on the snapshot times (``psi``
    vanishes at ``T``), space integrals the rectangle rule.

    Raises
    ------
    NeedsDenserTrajectoryError
        Fewer than ``min_intervals`` snapshots per ``[0, T]``.
    """
    if traj.grid != tf.grid:
        raise ParameterError("trajectory and test function live on different grids")
    g = tf.grid
    p, T = tf.p, tf.T
    if not math.isclose(p, params.p):
        raise ParameterError(f"test function built for p={p}, equation has p={params.p}")
    tk, uk = traj.window(T, min_intervals)
    t = np.append(tk, T)
    cv = g.cell_volume
    w_space = np.where(tf.ball, tf.phi_R_ell.values, 0.0)

    up_ball = np.empty(t.size)
    src_ball = np.empty(t.size)
    lin = np.empty(t.size)
    dtm = np.empty(t.size)
    for k, v in enumerate(uk):
        v = np.clip(v, 0.0, None)
        up = v**p
        up_ball[k] = np.sum(up * w_space) * cv
        src_ball[k] = np.sum(params.source(v, g) * w_space) * cv
        lin[k] = np.sum(v * tf.lap_phi_R_ell.values) * cv
        dtm[k] = np.sum(v * tf.phi_R_ell.values) * cv
    # psi(T) = 0, so the values at t = T never enter
    up_ball[-1] = src_ball[-1] = lin[-1] = dtm[-1] = 0.0
    phiT_ell = tf.phi_T(t) ** tf.ell
    dphiT_ell = tf.dphi_T_ell(t)

    I = _trapz_window(t, up_ball * phiT_ell, 0.0, T)
    J = _trapz_window(t, up_ball * phiT_ell, T / 2, T)
    source_term = _trapz_window(t, src_ball * phiT_ell, 0.0, T)
    data_term = float(np.sum(np.clip(uk[0], 0.0, None) * w_space) * cv)
    I1 = _trapz_window(t, lin * phiT_ell, 0.0, T)
    I2 = -_trapz_window(t, dtm * dphiT_ell, 0.0, T)
    J1, J2 = tf.J1(), tf.J2()
    rhs = J1 * I ** (1 / p) + J2 * J ** (1 / p)
    C = _lower_bound_constant(params, tf.R)
    riesz_lower = C * I if math.isfinite(C) else I
    lhs = riesz_lower + data_term
    lhs_full = source_term + data_term
    scale = max(abs(source_term) + abs(data_term), abs(I1) + abs(I2), np.finfo(float).tiny)
    identity = (source_term + data_term - I1 - I2) / scale
    ju = tf.ju_min()
    holds = bool(lhs_full <= CUSHION * rhs + 1e-300 and lhs <= CUSHION * rhs + 1e-300)
    lower_ok = bool(riesz_lower <= CUSHION * source_term + 1e-300)
    return CapacityReport(
        R=tf.R,
        T=T,
        p=p,
        J1=J1,
        J2=J2,
        I=I,
        J=J,
        source_term=source_term,
        riesz_lower=riesz_lower,
        data_term=data_term,
        lhs=lhs,
        lhs_full=lhs_full,
        rhs=rhs,
        identity_residual=identity,
        ju_min=ju,
        holds=holds,
        lower_bound_holds=lower_ok,
    )


# -- regressions -------------------------------------------------------------


@dataclass
class ScalingFit:
    """Least-squares power law ``y = c x^exponent`` in log-log coordinates."""

    exponent: float
    stderr: float
    residual: float
    samples: int


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> ScalingFit:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 3:
        raise RegressionError(f"need at least 3 positive samples for a power-law fit, got {int(ok.sum())}")
    lx, ly = np.log(x[ok]), np.log(y[ok])
    fit = stats.linregress(lx, ly)
    resid = ly - (fit.intercept + fit.slope * lx)
    return ScalingFit(float(fit.slope), float(fit.stderr), float(np.sqrt(np.mean(resid**2))), int(ok.sum()))


def test_function_scaling(
    p: float,
    beta: float,
    grid: Grid,
    R_values: Sequence[float],
    T_values: Sequence[float],
    R_fixed: float,
    T_fixed: float,
    padding: float = 4.0,
) -> dict[str, ScalingFit]:
    """Fitted R- and T-exponents of ``J1`` and ``J2`` on one grid."""
    J1R, J2R = [], []
    for R in R_values:
        tf = build_test_function(p, R, T_fixed, grid, beta, padding)
        J1R.append(tf.J1())
        J2R.append(tf.J2())
    J1T, J2T = [], []
    for T in T_values:
        tf = build_test_function(p, R_fixed, T, grid, beta, padding)
        J1T.append(tf.J1())
        J2T.append(tf.J2())
    return {
        "J1_R": fit_power_law(R_values, J1R),
        "J2_R": fit_power_law(R_values, J2R),
        "J1_T": fit_power_law(T_values, J1T),
        "J2_T": fit_power_law(T_values, J2T),
    }


def predicted_exponents(p: float, n: int, beta: float) -> dict[str, float]:
    """Exponents of ``J1 ~ T^((p-1)/p) R^(n(p-1)/p - beta)`` and ``J2 ~ R^(n(p-1)/p) T^(-1/p)``."""
    return {
        "J1_R": n * (p - 1) / p - beta,
        "J2_R": n * (p - 1) / p,
        "J1_T": (p - 1) / p,
        "J2_T": -1.0 / p,
    }


@dataclass
class CapacityVerdict:
    """Outcome of :func:`verify_capacity_inequality`."""

    mode: str
    vacuous: bool
    inequality_holds: bool
    lower_bound_holds: bool
    predicted_slope: float = math.nan
    measured: ScalingFit | None = None
    slope_bound_holds: bool | None = None
    interpretation: str = ""
    splits: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        return json.loads(json.dumps(d, default=float).replace("NaN", "null"))


def verify_capacity_inequality(
    reports: Sequence[CapacityReport],
    params: EquationParams,
    mode: Literal["subcritical", "critical"] = "subcritical",
    slope_margin: float = 0.1,
) -> CapacityVerdict:
    """Check the inequality at every ``(R, T)`` and the decay law of ``I(T)``.

    ``subcritical`` expects ``R = T^(1/beta)`` and compares the fitted slope of
    ``I(T)`` with ``((n-alpha)p - n - beta)/(beta(p-1))``; a global solution
    must respect that bound, so a violation along a run is the signature of
    blow-up.  ``critical`` expects ``R = (K T)^(1/beta)`` for several ``K``
    and tabulates ``K^-1`` against ``K^((n-alpha)/(beta+n)) J^(1/p)``.
    """
    if not reports:
        raise RegressionError("no capacity reports to verify")
    beta, n, p = params.beta, params.n, params.p
    ok = all(r.holds for r in reports)
    lower_ok = all(r.lower_bound_holds for r in reports)
    vacuous = all(r.I == 0.0 and r.data_term == 0.0 for r in reports)
    if vacuous:
        return CapacityVerdict(mode, True, ok, lower_ok, interpretation="vacuous pass: zero trajectory")
    alpha = params.alpha if params.alpha is not None else 0.0
    if mode == "subcritical":
        for r in reports:
            if not math.isclose(r.R, r.T ** (1 / beta), rel_tol=1e-9):
                raise ParameterError(f"report at R={r.R}, T={r.T} is not on the coupling R = T^(1/beta)")
        Ts = [r.T for r in reports]
        if len(set(Ts)) < 3:
            raise RegressionError("need at least 3 distinct T for the I(T) slope")
        fit = fit_power_law(Ts, [r.I for r in reports])
        predicted = ((n - alpha) * p - n - beta) / (beta * (p - 1))
        bound = fit.exponent <= predicted + slope_margin
        if bound:
            msg = "I(T) obeys the decay bound required of a global solution"
        else:
            msg = (
                f"I(T) grows with slope {fit.exponent:.3f} > {predicted:.3f}: incompatible with a global "
                "nonnegative solution, consistent with finite-time blow-up"
            )
        return CapacityVerdict(mode, False, ok, lower_ok, predicted, fit, bound, msg)
    if mode == "critical":
        splits = []
        by_K: dict[float, list[CapacityReport]] = {}
        for r in reports:
            K = round(r.R**beta / r.T, 9)
            by_K.setdefault(K, []).append(r)
        if len(by_K) < 2:
            raise RegressionError("critical mode needs reports for at least two values of K")
        for K, rs in sorted(by_K.items()):
            rs = sorted(rs, key=lambda r: r.T)
            splits.append(
                {
                    "K": K,
                    "T": [r.T for r in rs],
                    "I": [r.I for r in rs],
                    "J": [r.J for r in rs],
                    "K_inv": 1.0 / K,
                    "J_term": [K ** ((n - alpha) / (beta + n)) * r.J ** (1 / p) for r in rs],
                    "J_decreasing": bool(len(rs) > 1 and rs[-1].J < rs[0].J),
                }
            )
        vanishing = all(s["J_decreasing"] for s in splits)
        msg = "J decreases along the window for every K" if vanishing else "J does not decrease along the window"
        return CapacityVerdict(mode, False, ok, lower_ok, interpretation=msg, splits=splits)
    raise ParameterError(f"unknown mode {mode!r}")


def reports_to_csv(reports: Sequence[CapacityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CAPACITY_CSV_COLUMNS)
    for r in reports:
        w.writerow([repr(float(getattr(r, c))) for c in CAPACITY_CSV_COLUMNS])
    return buf.getvalue()


# -- kernel conditions -------------------------------------------------------


@dataclass
class ConditionResult:
    """Verdict on one limit condition from a fitted power of a sequence in ``R``."""

    verdict: Literal["holds", "fails", "undecidable"]
    exponent: float
    stderr: float
    residual: float
    note: str = ""


@dataclass
class KernelConditionReport:
    kernel: str
    n: int
    beta: float
    p: float
    gamma: float | None
    radii: tuple[float, float]
    condition_i: ConditionResult
    condition_iii: ConditionResult | None
    statement: str = ""

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self), default=float))


def _fit_sequence(logR: np.ndarray, logS: np.ndarray) -> tuple[float, float, float, float]:
    """Slope, its standard error, RMS residual and the change of local slope between the first and last decade."""
    fit = stats.linregress(logR, logS)
    resid = logS - (fit.intercept + fit.slope * logR)
    local = np.gradient(logS, logR)
    k = max(2, logR.size // 4)
    drift = float(np.mean(local[-k:]) - np.mean(local[:k]))
    return float(fit.slope), float(fit.stderr), float(np.sqrt(np.mean(resid**2))), drift


def _condition(logR, logS, positive_needed: bool, tol: float) -> ConditionResult:
    """``positive_needed``: the condition holds when the sequence does not decay (``limsup > 0``);
    otherwise it holds when the sequence tends to zero (``liminf = 0``)."""
    slope, se, resid, drift = _fit_sequence(logR, logS)
    local = np.gradient(logS, logR)
    unc = max(se, tol)
    if resid > 0.1:
        # curved in log-log: a super-power law if the local slope keeps running away
        if drift < -1.0 and local[-1] < 0:
            e = -math.inf
        elif drift > 1.0 and local[-1] > 0:
            e = math.inf
        else:
            return ConditionResult("undecidable", slope, se, resid, "fit residual above 10%")
        if positive_needed:
            verdict = "holds" if e > 0 else "fails"
        else:
            verdict = "holds" if e < 0 else "fails"
        return ConditionResult(verdict, e, se, resid, "faster than any power")
    if positive_needed:
        verdict = "holds" if slope >= -unc else "fails"
    else:
        verdict = "holds" if slope < -unc else "fails"
    return ConditionResult(verdict, slope, se, resid)


def kernel_limit_conditions(
    K: ConvolutionKernel,
    n: int,
    beta: float,
    p: float,
    gamma: float | None = None,
    radii: Sequence[float] | None = None,
    tol: float = 1e-9,
) -> KernelConditionReport:
    """Decide the large-``R`` conditions on ``K`` from fitted powers.

    Condition (i): ``limsup K(R) R^((n+beta)/p) > 0``.
    Condition (iii): ``liminf K(R)^-1 R^(gamma(p-1) - n - beta) = 0``.

    Raises
    ------
    KernelError
        Non-positive kernel samples.
    ParameterError
        Fewer than four decades of radii.
    """
    if radii is None:
        R0 = max(K.monotone_tail_radius, 1.0)
        radii = np.geomspace(10 * R0, 10 * R0 * 1e5, 121)
    radii = np.asarray(radii, dtype=float)
    if radii.min() <= 0 or np.log10(radii.max() / radii.min()) < 4 - 1e-9:
        raise ParameterError("radius grid must be positive and span at least four decades")
    logR = np.log(radii)
    logK = K.log(radii)
    if not np.all(np.isfinite(logK)):
        raise KernelError(f"kernel '{K.name}' has non-positive or non-finite samples")
    ci = _condition(logR, logK + (n + beta) / p * logR, True, tol)
    ciii = None
    if gamma is not None:
        ciii = _condition(logR, -logK + (gamma * (p - 1) - n - beta) * logR, False, tol)
    statement = ""
    if K.riesz_order is not None:
        alpha = K.riesz_order
        p_fuj = 1 + (beta + alpha) / (n - alpha)
        statement = f"for the Riesz kernel, condition (i) holds iff p <= (n+beta)/(n-alpha) = p_fuj = {p_fuj:.6g}"
        if gamma is not None:
            statement += f"; condition (iii) holds iff p < 1 + (beta+alpha)/gamma = {1 + (beta + alpha) / gamma:.6g}"
    return KernelConditionReport(
        kernel=K.name,
        n=n,
        beta=beta,
        p=p,
        gamma=gamma,
        radii=(float(radii.min()), float(radii.max())),
        condition_i=ci,
        condition_iii=ciii,
        statement=statement,
    )


# -- data functional -----------------------------------------------------------


def mass_functional(u0: Field, alpha: float, R_values: Sequence[float]) -> np.ndarray:
    """``R^-alpha int_{B_R} u0`` by the rectangle rule over the nodes with ``|x| <= R``."""
    g = u0.grid
    R_values = np.asarray(R_values, dtype=float)
    if np.any(R_values > g.L / 2) or np.any(R_values <= 0):
        raise ParameterError(f"radii must lie in (0, L/2 = {g.L / 2:g}]")
    r = g.radius
    return np.array([R ** (-alpha) * float(u0.values[r <= R].sum()) * g.cell_volume for R in R_values])
