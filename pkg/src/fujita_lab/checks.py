"""
End-to-end checks with fixed setups and thresholds.

Each ``check_*`` function runs one experiment and returns a
:class:`CheckResult` with the measured quantities, the thresholds they are
compared with and the wall time.  The ``verify`` command and the test suite
both use them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .capacity import (
    Trajectory,
    build_test_function,
    capacity_integrals,
    kernel_limit_conditions,
    predicted_exponents,
    test_function_scaling,
)
from .dynamics import EquationParams, SolverConfig, evolve, scaling_exponent, scaling_transform, weighted_norm_track
from .grid import Grid, lp_norm
from .kernels import ConvolutionKernel
from .operators import RieszKernel, frac_laplacian_apply, frac_laplacian_pv, riesz_apply
from .propagator import etd_step, picard_solve_local, semigroup_apply

__all__ = ["CheckResult", "CHECKS", "run_checks"]


@dataclass
class CheckResult:
    """Outcome of one check: ``passed`` is the conjunction of all criteria."""

    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    criteria: dict = field(default_factory=dict)
    runtime: float = 0.0
    runtime_limit: float = math.inf

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items() if np.isscalar(v))
        return f"[{status}] {self.name} ({self.runtime:.1f}s / {self.runtime_limit:g}s): {shown}"


def _fmt(v):
    if isinstance(v, (bool, np.bool_, str)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.4g}"


def _finish(name, t0, limit, metrics, criteria) -> CheckResult:
    runtime = time.perf_counter() - t0
    criteria = dict(criteria)
    criteria["runtime"] = runtime < limit
    return CheckResult(name, all(bool(v) for v in criteria.values()), metrics, criteria, runtime, limit)


def _gaussian(grid: Grid, amp: float, sigma: float):
    return grid.sample(lambda *xs: amp * np.exp(-sum(x**2 for x in xs) / (2 * sigma**2)))


# 1 -------------------------------------------------------------------------


def check_operator_oracle() -> CheckResult:
    """Multiplier ``(-Delta)^(1/2)`` against the principal-value quadrature on a smooth bump."""
    t0 = time.perf_counter()
    g = Grid(1, 16.0, 256)

    def bump(x):
        x = np.asarray(x, dtype=float)
        # periodic extension: the quadrature sees the same function as the FFT
        y = (x + g.L / 2) % g.L - g.L / 2
        s = 1 - (y / 2) ** 2
        out = np.zeros_like(y)
        inside = s > 0
        out[inside] = np.exp(-1 / s[inside])
        return out

    f = g.sample(bump)
    spectral = frac_laplacian_apply(f, 1.0).values
    pv = frac_laplacian_pv(bump, 0.5, g.x_axis, h=1e-2, outer=400.0, far_mean=f.mean())
    err = float(np.linalg.norm(pv.value - spectral) / np.linalg.norm(spectral))
    return _finish("operator oracle (p.v. vs multiplier, beta=1, N=256)", t0, 10.0, {"rel_l2": err}, {"rel_l2": err < 1e-3})


# 2 -------------------------------------------------------------------------


def check_semigroup_exactness(seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    g = Grid(1, 64.0, 512)
    coeffs = rng.normal(size=40) / (1 + np.arange(40)) ** 2
    f = g.sample(lambda x: sum(c * np.cos(2 * np.pi * (k + 1) * x / g.L + k) for k, c in enumerate(coeffs)) + 1.0)
    worst_law = worst_mass = 0.0
    for beta in (0.5, 1.0, 1.5, 2.0):
        for t, s in ((0.1, 0.3), (1.0, 2.5), (0.01, 7.0)):
            a = semigroup_apply(semigroup_apply(f, t, beta), s, beta).values
            b = semigroup_apply(f, t + s, beta).values
            worst_law = max(worst_law, float(np.abs(a - b).max() / np.abs(b).max()))
            worst_mass = max(worst_mass, abs(b.mean() - f.mean()) / abs(f.values).max())
    a0, t = 1.0, 2.0
    u0 = g.sample(lambda x: np.exp(-(x**2) / (4 * a0)))
    u = semigroup_apply(u0, t, 2.0).values
    exact = np.sqrt(a0 / (a0 + t)) * np.exp(-(g.x_axis**2) / (4 * (a0 + t)))
    inner = np.abs(g.x_axis) < g.L / 4
    gauss = float(np.abs(u - exact)[inner].max())
    return _finish(
        "semigroup exactness",
        t0,
        5.0,
        {"semigroup_law": worst_law, "mass_drift": worst_mass, "gaussian_error": gauss},
        {"semigroup_law": worst_law < 1e-13, "mass_drift": worst_mass < 1e-14, "gaussian_error": gauss < 1e-8},
    )


# 3 -------------------------------------------------------------------------

DECAY_SETUPS = {
    # (n, beta): (box, points, t window)
    (1, 1.0): (4096.0, 8192, (10.0, 100.0)),
    (1, 2.0): (1024.0, 2048, (25.0, 1000.0)),
    (2, 2.0): (512.0, 1024, (25.0, 1000.0)),
}


def decay_slope(n: int, beta: float) -> float:
    """Fitted slope of ``log ||S(t) u0||_inf`` against ``log t`` for a unit Gaussian."""
    L, N, (t1, t2) = DECAY_SETUPS[(n, beta)]
    g = Grid(n, L, N)
    u0 = _gaussian(g, 1.0, 1.0)
    ts = np.geomspace(t1, t2, 10)
    sup = [lp_norm(semigroup_apply(u0, t, beta), np.inf) for t in ts]
    return float(np.polyfit(np.log(ts), np.log(sup), 1)[0])


def check_decay_exponent() -> CheckResult:
    t0 = time.perf_counter()
    metrics, criteria = {}, {}
    for (n, beta) in DECAY_SETUPS:
        slope = decay_slope(n, beta)
        target = -n / beta
        rel = abs(slope - target) / abs(target)
        key = f"n{n}_beta{beta:g}"
        metrics[f"slope_{key}"] = slope
        metrics[f"relerr_{key}"] = rel
        criteria[key] = rel < 0.05
    return _finish("L1 -> Linf decay exponent", t0, 30.0, metrics, criteria)


# 4 -------------------------------------------------------------------------


def hls_ratios(count: int = 200, seed: int = 0, alpha: float = 0.5, p: float = 1.5) -> np.ndarray:
    """``||I_alpha f||_r / ||f||_p`` with ``1/r = 1/p - alpha`` over random mean-zero fields (n = 1)."""
    r = 1.0 / (1.0 / p - alpha)
    g = Grid(1, 64.0, 1024)
    K = RieszKernel(alpha, 1)
    rng = np.random.default_rng(seed)
    x = g.x_axis
    out = np.empty(count)
    for i in range(count):
        m = int(rng.integers(1, 8))
        vals = np.zeros_like(x)
        for _ in range(m):
            c = rng.uniform(-g.L / 4, g.L / 4)
            w = rng.uniform(0.3, 4.0)
            vals += rng.normal() * np.exp(-((x - c) ** 2) / (2 * w**2))
        vals -= vals.mean()
        f = g.sample(lambda _x: vals)
        out[i] = lp_norm(riesz_apply(f, K), r) / lp_norm(f, p)
    return out


def check_hls(seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    ratios = hls_ratios(seed=seed)
    spread = float(ratios.max() / np.median(ratios))
    return _finish("HLS boundedness (n=1, alpha=0.5, p=1.5, r=6)", t0, 60.0, {"max_over_median": spread}, {"max_over_median": spread < 3})


# 5 -------------------------------------------------------------------------


def capacity_audit(points: int = 2048):
    """Stored blow-up run (n=1, beta=2, alpha=0.5, p=3) and the capacity reports on it."""
    g = Grid(1, 64.0, points)
    params = EquationParams(n=1, beta=2.0, p=3.0, alpha=0.5)
    run = evolve(_gaussian(g, 1 / math.sqrt(2 * math.pi), 1.0), params, SolverConfig(t_end=50.0, snapshot_interval=0.025))
    traj = Trajectory.from_run(run, g)
    t_last = float(run.snapshot_times[-1])
    reports = []
    for frac in (0.1, 0.2, 0.4, 0.6, 0.8, 0.95):
        T = frac * t_last
        for R in (4.0, 8.0, 16.0):
            reports.append(capacity_integrals(traj, build_test_function(3.0, R, T, g, 2.0), params))
    return run, reports


def check_capacity_audit() -> CheckResult:
    t0 = time.perf_counter()
    run, reports = capacity_audit()
    worst = max(r.lhs_full / r.rhs for r in reports)
    worst10 = max(r.lhs / r.rhs for r in reports)
    ju = min(r.ju_min for r in reports)
    fits = test_function_scaling(3.0, 2.0, Grid(1, 256.0, 2048), [8, 16, 32, 64], [1, 2, 4, 8], 16.0, 4.0)
    pred = predicted_exponents(3.0, 1, 2.0)
    rel = {k: abs(fits[k].exponent - pred[k]) / abs(pred[k]) for k in pred}
    metrics = {
        "classification": run.classification,
        "max_lhs_over_rhs": worst,
        "max_lower_lhs_over_rhs": worst10,
        "lower_bound_ok": all(r.lower_bound_holds for r in reports),
        "ju_min": ju,
    }
    metrics.update({f"exp_{k}": fits[k].exponent for k in pred})
    criteria = {
        "blowup_run": run.classification == "blowup",
        "inequality": all(r.holds for r in reports),
        "lower_bound": metrics["lower_bound_ok"],
        "ju": ju >= -1e-8,
    }
    criteria.update({f"exp_{k}": rel[k] < 0.05 for k in pred})
    return _finish("capacity audit (p=3 blow-up run)", t0, 300.0, metrics, criteria)


# 6 -------------------------------------------------------------------------

DICHOTOMY_GRID = Grid(1, 64.0, 512)


def dichotomy_runs():
    g = DICHOTOMY_GRID
    out = {}
    a = EquationParams(n=1, beta=2.0, p=3.0, alpha=0.5)
    out["a"] = evolve(_gaussian(g, 1 / math.sqrt(2 * math.pi), 1.0), a, SolverConfig(t_end=50.0))
    b = EquationParams(n=1, beta=2.0, p=4.5, alpha=0.5)
    out["b1"] = evolve(_gaussian(g, 1.0, 4.0), b, SolverConfig(t_end=50.0))
    out["b05"] = evolve(_gaussian(g, 0.5, 4.0), b, SolverConfig(t_end=50.0))
    c = EquationParams(n=1, beta=2.0, p=8.0, alpha=0.5)
    q = 8.5
    u0 = _gaussian(g, 0.3, 1.0)
    cfg = SolverConfig(t_end=50.0, q=q)
    out["c"] = evolve(u0, c, cfg)
    out["c_linear"] = evolve(u0, c.replace(coupling=0.0), cfg)
    out["c_params"] = c
    return out


def check_dichotomy() -> CheckResult:
    t0 = time.perf_counter()
    runs = dichotomy_runs()
    a, b1, b05, c, lin = runs["a"], runs["b1"], runs["b05"], runs["c"], runs["c_linear"]
    track = weighted_norm_track(c, runs["c_params"], c.q)
    rho = float(np.max(lin.history["weighted"]))
    delta = 2 * rho
    metrics = {
        "a_class": a.classification,
        "a_residual": a.blowup_fit.residual if a.blowup_fit else math.nan,
        "b1_class": b1.classification,
        "b05_class": b05.classification,
        "b1_T": b1.t_blowup or math.nan,
        "b05_T": b05.t_blowup or math.nan,
        "c_class": c.classification,
        "c_sup": track.supremum,
        "c_delta": delta,
        "c_tail_nongrowing": track.tail_nongrowing,
    }
    criteria = {
        "a_blowup": a.classification == "blowup",
        "a_fit": a.blowup_fit is not None and not a.blowup_fit.wide_uncertainty and a.blowup_fit.residual < 0.1,
        "b_blowup": b1.classification == "blowup" and b05.classification == "blowup",
        "b_order": (b1.t_blowup or math.inf) < (b05.t_blowup or -math.inf),
        "c_global": c.classification == "global_decay",
        "c_sup_finite": math.isfinite(track.supremum),
        "c_below_delta": track.supremum <= delta,
        "c_tail": track.tail_nongrowing,
    }
    return _finish("dichotomy reproduction (n=1, beta=2, alpha=0.5)", t0, 1200.0, metrics, criteria)


# 7 -------------------------------------------------------------------------


def check_ode_reduction() -> CheckResult:
    t0 = time.perf_counter()
    g = Grid(1, 64.0, 512)
    run = evolve(g.sample(lambda x: np.ones_like(x)), EquationParams(n=1, beta=2.0, p=2.0, nonlinearity="local"), SolverConfig(t_end=5.0))
    T = run.t_blowup if run.t_blowup is not None else math.nan
    return _finish(
        "ODE reduction (constant data, local, p=2)",
        t0,
        10.0,
        {"classification": run.classification, "T_est": T, "rel_err": abs(T - 1.0)},
        {"blowup": run.classification == "blowup", "T_est": abs(T - 1.0) < 0.02},
    )


# 8 -------------------------------------------------------------------------


def scaling_covariance(lam: float = 2.0):
    """Max relative difference between rescaled evolution and evolution of rescaled data."""
    g = Grid(1, 64.0, 512)
    params = EquationParams(n=1, beta=2.0, p=4.5, alpha=0.5)
    u0 = _gaussian(g, 0.4, 2.0)
    cfg = SolverConfig(t_end=1.0, snapshot_interval=0.125)
    run = evolve(u0, params, cfg)
    v0 = scaling_transform(u0, lam, params)
    run_l = evolve(v0, params, cfg.scaled(lam, params.beta))
    fac = lam ** scaling_exponent(params)
    diffs = []
    for a, b in zip(run.snapshots, run_l.snapshots):
        diffs.append(float(np.abs(fac * a - b).max() / np.abs(b).max()))
    q_sc = g.n * (params.p - 1) / (params.beta + params.alpha)
    n0, n1 = lp_norm(u0, q_sc), lp_norm(v0, q_sc)
    return max(diffs), abs(n1 - n0) / n0, run, run_l


def check_scaling_covariance() -> CheckResult:
    t0 = time.perf_counter()
    traj, norm, run, run_l = scaling_covariance()
    return _finish(
        "scaling covariance (lambda=2, beta=2)",
        t0,
        math.inf,
        {"trajectory_rel": traj, "qsc_norm_rel": norm, "same_class": run.classification == run_l.classification},
        {"trajectory": traj < 0.01, "qsc_norm": norm < 1e-12, "same_class": run.classification == run_l.classification},
    )


# 9 -------------------------------------------------------------------------


def picard_agreement():
    g = Grid(1, 64.0, 512)
    params = EquationParams(n=1, beta=2.0, p=3.0, alpha=0.5)
    u0 = g.sample(lambda x: np.exp(-(x**2) / 4))
    traj, report = picard_solve_local(u0, 0.25, params, s=3.0)
    T = report.horizon

    def etd(steps):
        v = u0
        for k in range(steps):
            v = etd_step(v, T / steps, params, k * T / steps)
        return v.values

    coarse, fine = etd(512), etd(1024)
    ref = fine + (fine - coarse) / 3  # second order: Richardson to dt -> 0
    err = float(np.abs(traj[-1].values - ref).max() / np.abs(ref).max())
    return err, report


def check_picard_agreement() -> CheckResult:
    t0 = time.perf_counter()
    err, report = picard_agreement()
    worst = max(report.ratios, default=0.0)
    return _finish(
        "Picard / ETD agreement",
        t0,
        60.0,
        {"rel_linf": err, "max_ratio": worst, "horizon": report.horizon, "iterations": report.iterations},
        {"rel_linf": err < 1e-4, "ratios": worst <= 0.5},
    )


# 10 ------------------------------------------------------------------------


def check_kernel_classifier() -> CheckResult:
    t0 = time.perf_counter()
    n, beta, alpha = 1, 2.0, 0.5
    riesz = ConvolutionKernel.riesz(alpha, n)
    p_fuj = 1 + (beta + alpha) / (n - alpha)
    ok_i = ok_iii = True
    for p in (4.0, 5.5, 5.9, 5.99, 6.0, 6.01, 6.1, 6.5, 8.0):
        rep = kernel_limit_conditions(riesz, n, beta, p)
        ok_i &= (rep.condition_i.verdict == "holds") == (p <= p_fuj)
    # gamma = 0.5 puts p_star on p_fuj; gamma = 1 separates them
    for gamma in (0.5, 1.0):
        p_star = 1 + (beta + alpha) / gamma
        for d in (-0.1, -0.01, -0.001, 0.0, 0.001, 0.01, 0.1):
            p = p_star * (1 + d)
            rep = kernel_limit_conditions(riesz, n, beta, p, gamma=gamma)
            ok_iii &= (rep.condition_iii.verdict == "holds") == (p < p_star)
    exp_rep = kernel_limit_conditions(ConvolutionKernel.exponential(n, 1.0), n, beta, 3.0)
    return _finish(
        "kernel condition classifier",
        t0,
        10.0,
        {"riesz_i_flips_at_p_fuj": ok_i, "riesz_iii_flips_at_p_star": ok_iii, "exp_i": exp_rep.condition_i.verdict},
        {"riesz_i": ok_i, "riesz_iii": ok_iii, "exp_fails": exp_rep.condition_i.verdict == "fails"},
    )


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "operator_oracle": check_operator_oracle,
    "semigroup": check_semigroup_exactness,
    "decay": check_decay_exponent,
    "hls": check_hls,
    "capacity": check_capacity_audit,
    "dichotomy": check_dichotomy,
    "ode": check_ode_reduction,
    "scaling": check_scaling_covariance,
    "picard": check_picard_agreement,
    "kernel_conditions": check_kernel_classifier,
}


def run_checks(names=None, echo: Callable[[str], None] | None = print) -> list[CheckResult]:
    out = []
    for name in names or CHECKS:
        res = CHECKS[name]()
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
