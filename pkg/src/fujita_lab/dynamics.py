"""
Initial-value runs: adaptive ETD integration, blow-up detection,
classification, the weighted ``L^q`` track and the scaling family.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Literal

import numpy as np
from scipy import optimize

from .equation import EquationParams
from .errors import BlowUpSignal, ParameterError
from .grid import Field, Grid, check_finite, lp_norm
from .propagator import _etd_values, _propagator, step_controller

__all__ = [
    "EquationParams",
    "SolverConfig",
    "RunResult",
    "BlowupFit",
    "WeightedTrack",
    "evolve",
    "blowup_time_estimate",
    "admissible_q_interval",
    "weighted_norm_track",
    "scaling_exponent",
    "scaling_transform",
    "HISTORY_COLUMNS",
    "RESULT_SCHEMA",
    "RESULT_SCHEMA_VERSION",
]

RESULT_SCHEMA = "fujita-lab/run-result"
RESULT_SCHEMA_VERSION = 1
HISTORY_COLUMNS = ("t", "linf", "ls", "lqsc", "weighted", "boundary_mass")
# stored alongside the CSV columns
_EXTRA_COLUMNS = ("mass", "dt")

Classification = Literal["global_decay", "blowup", "inconclusive"]


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings of a run.

    Parameters
    ----------
    t_end : float
        Horizon ``T_end``.
    dt_max, dt_min : float
        Step-size bounds.  Hitting ``dt_min`` while ``||u||_inf`` grows
        ``growth_factor``-fold over ``growth_window`` steps counts as blow-up.
    blowup_threshold : float
        ``M_blow``: blow-up is declared once ``||u||_inf`` exceeds it.
    dealias_fraction : float
        Fraction of the Nyquist index kept after evaluating ``|u|^p``.
    boundary_alarm : float
        Largest admissible share of ``int |u|`` in the edge zone.
    boundary_zone : float
        Width of the edge zone as a fraction of ``L``.
    s : float, optional
        Exponent of the tracked ``||u||_s``; defaults to the middle of the
        local-existence range, or 2 when there is none.
    q : float, optional
        Exponent of the weighted norm ``t^beta* ||u||_q``; not tracked if None.
    snapshot_interval : float, optional
        Cadence at which full fields are stored; none are stored if None.
    max_steps : int
        Step budget; exhausting it gives an inconclusive run.
    """

    t_end: float = 50.0
    dt_max: float = 0.05
    dt_min: float = 1e-12
    blowup_threshold: float = 1e8
    dealias_fraction: float = 2.0 / 3.0
    boundary_alarm: float = 0.01
    boundary_zone: float = 0.05
    s: float | None = None
    q: float | None = None
    snapshot_interval: float | None = None
    growth_window: int = 20
    growth_factor: float = 10.0
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not 0 < self.dt_min < self.dt_max:
            raise ParameterError(f"need 0 < dt_min < dt_max, got dt_min={self.dt_min}, dt_max={self.dt_max}")
        if not self.t_end > 0:
            raise ParameterError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.dealias_fraction <= 1:
            raise ParameterError(f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}")
        if not 0 < self.boundary_zone < 0.5:
            raise ParameterError(f"boundary_zone must lie in (0, 0.5), got {self.boundary_zone}")
        if self.snapshot_interval is not None and not self.snapshot_interval > 0:
            raise ParameterError("snapshot_interval must be positive")

    def scaled(self, lam: float, beta: float) -> "SolverConfig":
        """Settings for the run of ``u_lambda``: every time scaled by ``lam^-beta``."""
        f = lam ** (-beta)
        snap = None if self.snapshot_interval is None else self.snapshot_interval * f
        from dataclasses import replace

        return replace(
            self, t_end=self.t_end * f, dt_max=self.dt_max * f, dt_min=self.dt_min * f, snapshot_interval=snap
        )


@dataclass
class BlowupFit:
    """Fit of ``||u||_inf = c (T* - t)^(-1/(p-1))`` to the last decade of growth."""

    t_star: float
    residual: float
    samples: int
    wide_uncertainty: bool
    amplitude: float = math.nan


@dataclass
class RunResult:
    """Outcome and norm history of :func:`evolve`."""

    classification: Classification
    reason: str
    history: dict[str, np.ndarray]
    s: float
    q_sc: float
    q: float | None = None
    beta_star: float | None = None
    t_blowup: float | None = None
    blowup_fit: BlowupFit | None = None
    flags: list[str] = field(default_factory=list)
    steps: int = 0
    params: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    snapshot_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    snapshots: np.ndarray | None = field(default=None, repr=False)
    wall_time: float = field(default=0.0, compare=False)

    @property
    def t_final(self) -> float:
        return float(self.history["t"][-1])

    def snapshot_fields(self, grid: Grid) -> list[Field]:
        if self.snapshots is None:
            return []
        return [Field(grid, v) for v in self.snapshots]

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready dictionary; ``wall_time`` and the field snapshots are left out."""
        return {
            "schema": RESULT_SCHEMA,
            "version": RESULT_SCHEMA_VERSION,
            "classification": self.classification,
            "reason": self.reason,
            "t_blowup": _num(self.t_blowup),
            "blowup_fit": None if self.blowup_fit is None else {k: _num(v) for k, v in asdict(self.blowup_fit).items()},
            "flags": list(self.flags),
            "steps": self.steps,
            "s": _num(self.s),
            "q_sc": _num(self.q_sc),
            "q": _num(self.q),
            "beta_star": _num(self.beta_star),
            "params": self.params,
            "config": self.config,
            "grid": self.grid,
            "snapshot_times": [_num(v) for v in self.snapshot_times],
            "history": {k: [_num(v) for v in np.asarray(a)] for k, a in self.history.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "RunResult":
        if d.get("schema") != RESULT_SCHEMA:
            raise ParameterError(f"not a run result document (schema={d.get('schema')!r})")
        if d.get("version") != RESULT_SCHEMA_VERSION:
            raise ParameterError(f"unsupported run result version {d.get('version')}")
        fit = d.get("blowup_fit")
        if fit is not None:
            fit = BlowupFit(**{k: _unnum(v) for k, v in fit.items()})
            fit.samples = int(fit.samples)
            fit.wide_uncertainty = bool(fit.wide_uncertainty)
        return cls(
            classification=d["classification"],
            reason=d["reason"],
            history={k: np.array([_unnum(v) for v in a], dtype=float) for k, a in d["history"].items()},
            s=_unnum(d["s"]),
            q_sc=_unnum(d["q_sc"]),
            q=d["q"],
            beta_star=d["beta_star"],
            t_blowup=d["t_blowup"],
            blowup_fit=fit,
            flags=list(d["flags"]),
            steps=int(d["steps"]),
            params=d["params"],
            config=d["config"],
            grid=d["grid"],
            snapshot_times=np.array([_unnum(v) for v in d["snapshot_times"]], dtype=float),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunResult":
        return cls.from_dict(json.loads(text))

    def history_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HISTORY_COLUMNS)
        cols = [self.history[c] for c in HISTORY_COLUMNS]
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _num(v):
    """JSON has no NaN or inf; encode them as null and strings."""
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if math.isnan(v):
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _unnum(v):
    if v is None:
        return math.nan
    if isinstance(v, str):
        return float(v)
    return v


# -- exponents used while running ------------------------------------------


def _default_s(params: EquationParams) -> float:
    if params.nonlinearity == "riesz":
        n, a, p = params.n, params.alpha, params.p
        lo, hi = n / (n - a), n * (p - 1) / a
        if p > lo:
            return 0.5 * (lo + hi)
    return 2.0


def _q_sc(params: EquationParams) -> float:
    if not params.has_exponents:
        return math.nan
    return params.n * (params.p - 1) / (params.beta + params.alpha)


def admissible_q_interval(params: EquationParams) -> tuple[float, float]:
    """Open interval of ``q`` with ``q > p`` and ``a - 1/p < n/(beta q) < a``, ``a = (beta+alpha)/(beta(p-1))``."""
    if not params.has_exponents:
        raise ParameterError("weighted norms need a Riesz or local nonlinearity")
    n, b, p = params.n, params.beta, params.p
    a = (b + params.alpha) / (b * (p - 1))
    lo = max(p, n / (b * a))
    hi = n / (b * (a - 1 / p)) if a > 1 / p else math.inf
    return lo, hi


def _beta_star(params: EquationParams, q: float) -> float:
    n, b = params.n, params.beta
    return n / (b * _q_sc(params)) - n / (b * q)


def _check_q(params: EquationParams, q: float) -> float:
    lo, hi = admissible_q_interval(params)
    if not lo < q < hi:
        if lo >= hi:
            raise ParameterError(f"no admissible q for p={params.p}: the interval ({lo:.6g}, {hi:.6g}) is empty")
        raise ParameterError(f"q={q} outside the admissible interval ({lo:.6g}, {hi:.6g})")
    return _beta_star(params, q)


def _edge_mask(grid: Grid, zone: float) -> np.ndarray:
    inner = grid.L * (0.5 - zone)
    mask = np.zeros(grid.shape, dtype=bool)
    for c in grid.coords:
        mask |= np.broadcast_to(np.abs(c) >= inner, grid.shape)
    return mask


# -- the run loop ------------------------------------------------------------


def evolve(u0: Field, params: EquationParams, config: SolverConfig | None = None) -> RunResult:
    """Integrate from ``u0`` until ``t_end``, blow-up or a boundary alarm.

    Returns
    -------
    RunResult
        ``blowup`` when ``||u||_inf`` passes ``M_blow`` (or the step size is
        pinned at ``dt_min`` during fast growth); ``global_decay`` when the
        horizon is reached with ``||u||_inf`` below its initial value and not
        increasing over the last quarter; ``inconclusive`` otherwise.
    """
    config = config or SolverConfig()
    wall0 = time.perf_counter()
    grid = u0.grid
    check_finite(u0.values)
    if params.dealias_fraction != config.dealias_fraction:
        params = params.replace(dealias_fraction=config.dealias_fraction)
    linf0 = float(np.abs(u0.values).max())
    if not config.blowup_threshold > 10 * linf0:
        raise ParameterError(
            f"blow-up threshold {config.blowup_threshold:g} must exceed 10 ||u0||_inf = {10 * linf0:g}"
        )

    flags: list[str] = []
    if params.nonlinearity == "riesz" and params.p <= params.n / (params.n - params.alpha):
        flags.append("outside local-existence theory")
    s = config.s if config.s is not None else _default_s(params)
    q_sc = _q_sc(params)
    q = config.q
    beta_star = _check_q(params, q) if q is not None else None
    track_qsc = q_sc >= 1

    edge = _edge_mask(grid, config.boundary_zone)
    tab_for = _propagator(grid, params.beta).tables
    cv = grid.cell_volume

    cols: dict[str, list[float]] = {c: [] for c in HISTORY_COLUMNS + _EXTRA_COLUMNS}

    def record(t, v, dt):
        a = np.abs(v)
        # share of |u| above its floor: a uniform background, or the flat
        # periodized tail of a nonlocal source, is not mass reaching the edge
        excess = a - a.min()
        total = excess.sum()
        cols["t"].append(t)
        cols["linf"].append(float(a.max()))
        cols["ls"].append(lp_norm(v, s, grid))
        cols["lqsc"].append(lp_norm(v, q_sc, grid) if track_qsc else math.nan)
        cols["weighted"].append(t**beta_star * lp_norm(v, q, grid) if q is not None else math.nan)
        cols["boundary_mass"].append(float(excess[edge].sum() / total) if total > 0 else 0.0)
        cols["mass"].append(float(v.sum() * cv))
        cols["dt"].append(dt)

    snap_dt = config.snapshot_interval
    snap_times: list[float] = []
    snaps: list[np.ndarray] = []

    def snapshot(t, v):
        snap_times.append(t)
        snaps.append(v.copy())

    u = u0.values.copy()
    t = 0.0
    record(t, u, 0.0)
    if snap_dt is not None:
        snapshot(t, u)
    next_snap = snap_dt if snap_dt is not None else math.inf
    snap_index = 1

    classification: Classification | None = None
    reason = ""
    dt_prev = config.dt_max
    steps = 0
    pinned: list[bool] = []
    field_u = Field(grid, u)
    while True:
        if t >= config.t_end:
            break
        if steps >= config.max_steps:
            classification, reason = "inconclusive", f"step budget of {config.max_steps} exhausted at t={t:.6g}"
            break
        field_u.values = u
        dt = step_controller(field_u, dt_prev, params, config.dt_min, config.dt_max)
        at_min = dt <= config.dt_min
        target = min(next_snap, config.t_end)
        landing = t + dt >= target * (1 - 1e-14)
        if landing:
            dt = target - t
        try:
            u = _etd_values(u, dt, params, grid, tab_for(dt), t)
        except BlowUpSignal as sig:
            classification, reason = "blowup", f"overflow at t={sig.time:.9g}"
            break
        t = target if landing else t + dt
        steps += 1
        dt_prev = max(dt, config.dt_min) if not landing else dt_prev
        pinned.append(at_min)
        record(t, u, dt)
        if snap_dt is not None and t >= next_snap * (1 - 1e-14):
            snapshot(t, u)
            snap_index += 1
            next_snap = snap_index * snap_dt
        linf = cols["linf"][-1]
        if linf > config.blowup_threshold:
            classification, reason = "blowup", f"||u||_inf exceeded {config.blowup_threshold:g}"
            break
        w = config.growth_window
        if at_min and len(cols["linf"]) > w and linf >= config.growth_factor * cols["linf"][-1 - w]:
            classification, reason = "blowup", (
                f"step size pinned at dt_min with {config.growth_factor:g}x growth over {w} steps"
            )
            break
        if cols["boundary_mass"][-1] > config.boundary_alarm:
            classification, reason = "inconclusive", (
                f"domain truncation: {cols['boundary_mass'][-1]:.3%} of the mass within "
                f"{config.boundary_zone:.0%} of the box edge at t={t:.6g}"
            )
            break

    history = {k: np.asarray(v, dtype=float) for k, v in cols.items()}
    fit = None
    t_blowup = None
    if classification == "blowup":
        # steps taken at dt_min are not resolved by the controller; fit before them
        resolved = np.nonzero(np.asarray(pinned))[0]
        stop = resolved[0] + 1 if resolved.size else len(history["t"])
        fit = blowup_time_estimate({"t": history["t"][:stop], "linf": history["linf"][:stop]}, params.p)
        t_blowup = fit.t_star
    elif classification is None:
        classification, reason = _classify_horizon(history, linf0)

    if snap_dt is not None and (not snap_times or snap_times[-1] != t):
        snapshot(t, u)
    return RunResult(
        classification=classification,
        reason=reason,
        history=history,
        s=s,
        q_sc=q_sc,
        q=q,
        beta_star=beta_star,
        t_blowup=t_blowup,
        blowup_fit=fit,
        flags=flags,
        steps=steps,
        params=params.describe(),
        config=asdict(config),
        grid={"n": grid.n, "box_length": grid.L, "points_per_axis": grid.N},
        snapshot_times=np.asarray(snap_times, dtype=float),
        snapshots=np.asarray(snaps) if snap_dt is not None else None,
        wall_time=time.perf_counter() - wall0,
    )


def _classify_horizon(history: dict[str, np.ndarray], linf0: float) -> tuple[Classification, str]:
    t, linf = history["t"], history["linf"]
    if linf0 == 0.0 and np.all(linf == 0.0):
        return "global_decay", "zero solution"
    tail = linf[t >= 0.75 * t[-1]]
    rising = np.diff(tail) > 1e-12 * tail[:-1]
    if linf[-1] < linf0 and not rising.any():
        return "global_decay", f"global on horizon t <= {t[-1]:.6g} with decaying sup norm"
    if linf[-1] >= linf0:
        return "inconclusive", f"no blow-up observed within horizon t <= {t[-1]:.6g}"
    return "inconclusive", "non-monotone tail"


# -- blow-up time ------------------------------------------------------------


def blowup_time_estimate(history, p: float, min_samples: int = 8) -> BlowupFit:
    """Fit ``||u||_inf ~ c (T* - t)^(-1/(p-1))`` on the last decade of growth.

    Parameters
    ----------
    history : RunResult or mapping
        Anything with ``t`` and ``linf`` sequences.
    p : float
        Power of the nonlinearity; fixes the blow-up rate.
    min_samples : int
        Fewer samples in the decade give the last time and
        ``wide_uncertainty=True``.
    """
    if isinstance(history, RunResult):
        history = history.history
    t = np.asarray(history["t"], dtype=float)
    y = np.asarray(history["linf"], dtype=float)
    if t.size == 0:
        raise ParameterError("empty history")
    below = np.nonzero(y < y[-1] / 10.0)[0]
    if below.size == 0:
        return BlowupFit(float(t[-1]), math.nan, 0, True)
    seg = slice(below[-1] + 1, None)
    ts, ys = t[seg], y[seg]
    if ts.size < min_samples or np.any(ys <= 0):
        return BlowupFit(float(t[-1]), math.nan, int(ts.size), True)
    k = 1.0 / (p - 1)
    logy = np.log(ys)
    t_last = ts[-1]
    span = t_last - ts[0]

    def misfit(d):
        lg = np.log(t_last + d - ts)
        c = np.mean(logy + k * lg)
        return logy - (c - k * lg)

    # straight line through u^-(p-1) = C (T* - t) gives the starting guess
    slope, icpt = np.polyfit(ts, ys ** (-(p - 1)), 1)
    d0 = -icpt / slope - t_last if slope < 0 else span
    if not d0 > 0:
        d0 = 1e-3 * span
    lo = max(span * 1e-12, 8 * np.finfo(float).eps * abs(t_last), 1e-300)
    res = optimize.minimize_scalar(
        lambda ld: float(np.sum(misfit(math.exp(ld)) ** 2)),
        bracket=None,
        bounds=(math.log(lo), math.log(100.0 * span)),
        method="bounded",
        options={"xatol": 1e-10},
    )
    d = math.exp(res.x)
    if float(np.sum(misfit(d0) ** 2)) < res.fun:
        d = d0
    r = misfit(d)
    amp = math.exp(np.mean(logy + k * np.log(t_last + d - ts)))
    return BlowupFit(
        t_star=float(t_last + d),
        residual=float(np.sqrt(np.mean(r**2))),
        samples=int(ts.size),
        wide_uncertainty=False,
        amplitude=amp,
    )


# -- weighted norm -------------------------------------------------------------


@dataclass
class WeightedTrack:
    """``t^beta* ||u(t)||_q`` along a run."""

    times: np.ndarray
    values: np.ndarray
    supremum: float
    beta_star: float
    q: float
    interval: tuple[float, float]
    tail_nongrowing: bool


def weighted_norm_track(result: RunResult, params: EquationParams, q: float, grid: Grid | None = None) -> WeightedTrack:
    """``t^beta* ||u(t)||_q`` with ``beta* = n/(beta q_sc) - n/(beta q)``.

    Uses the recorded history when the run tracked the same ``q``, otherwise
    the stored snapshots (which then need ``grid``).

    Raises
    ------
    ParameterError
        ``q`` is outside the admissible interval (listed in the message), or
        the run holds neither the track nor snapshots.
    """
    bstar = _check_q(params, q)
    interval = admissible_q_interval(params)
    if result.q is not None and math.isclose(result.q, q, rel_tol=0, abs_tol=0):
        times = result.history["t"]
        values = result.history["weighted"]
    elif result.snapshots is not None and grid is not None:
        times = result.snapshot_times
        values = np.array([tt**bstar * lp_norm(v, q, grid) for tt, v in zip(times, result.snapshots)])
    else:
        raise ParameterError(f"run did not track q={q} and has no snapshots to compute it from")
    values = np.asarray(values, dtype=float)
    tail = values[times >= 0.75 * times[-1]]
    nongrowing = bool(np.all(np.diff(tail) <= 1e-12 * np.abs(tail[:-1])))
    return WeightedTrack(
        times=np.asarray(times, dtype=float),
        values=values,
        supremum=float(np.max(values)),
        beta_star=bstar,
        q=q,
        interval=interval,
        tail_nongrowing=nongrowing,
    )


# -- scaling -----------------------------------------------------------------


def scaling_exponent(params: EquationParams) -> float:
    """``(beta + alpha)/(p - 1)``: ``u_lambda(t, x) = lambda^this u(lambda^beta t, lambda x)``."""
    if not params.has_exponents:
        raise ParameterError("the scaling family needs a Riesz or local nonlinearity")
    return (params.beta + params.alpha) / (params.p - 1)


def scaling_transform(u: Field, lam: float, params: EquationParams, mode: str = "box") -> Field:
    """``lambda^((beta+alpha)/(p-1)) u(lambda x)``.

    Parameters
    ----------
    mode : {"box", "same_grid"}
        ``"box"`` returns the samples on the box ``L/lambda`` with the same
        point count (exact for every power of two).  ``"same_grid"`` keeps the
        grid and decimates, replicating periodically; it needs ``lambda`` to be
        a positive integer power of two.
    """
    k = math.log2(lam) if lam > 0 else math.nan
    if not (math.isfinite(k) and k == round(k)):
        raise ParameterError(f"lambda must be a power of two, got {lam}")
    factor = lam ** scaling_exponent(params)
    if mode == "box":
        return Field(u.grid.scaled(1.0 / lam), factor * u.values)
    if mode == "same_grid":
        if lam < 1:
            raise ParameterError("same-grid rescaling needs lambda >= 1; use mode='box'")
        step = int(lam)
        g = u.grid
        # x_j = -L/2 + j h, lambda x_j = x_{lambda j + (1 - lambda) N/2}  (mod N)
        shift = ((1 - step) * (g.N // 2)) % g.N
        idx = (step * np.arange(g.N) + shift) % g.N
        v = u.values
        for axis in range(g.n):
            v = np.take(v, idx, axis=axis)
        return Field(g, factor * v)
    raise ParameterError(f"unknown scaling mode {mode!r}")


def config_from_dict(d: dict) -> SolverConfig:
    known = {f.name for f in fields(SolverConfig)}
    return SolverConfig(**{k: v for k, v in d.items() if k in known})
