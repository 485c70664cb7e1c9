"""
Single runs, parameter sweeps and capacity audits with their on-disk artifacts.

Run directories are named ``<timestamp>-<hash>`` where ``hash`` is a content
hash of the resolved configuration.  File contents never depend on the
timestamp, the wall clock or the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .capacity import (
    CapacityVerdict,
    Trajectory,
    build_test_function,
    capacity_integrals,
    reports_to_csv,
    verify_capacity_inequality,
)
from .config import ExperimentConfig
from .dynamics import RunResult, evolve
from .errors import FujitaLabError, NeedsDenserTrajectoryError
from .exponents import critical_exponents
from .grid import Grid

__all__ = [
    "RunArtifacts",
    "PhaseCell",
    "PhaseDiagram",
    "AuditArtifacts",
    "run_single",
    "sweep",
    "audit",
    "load_run",
    "cell_seed",
    "new_run_directory",
]

PHASE_COLUMNS = ("alpha", "p", "amplitude", "classification", "t_blowup", "p_fuj", "p_sc", "reason")


def new_run_directory(root: str | Path, content_hash: str) -> Path:
    """Create ``root/<UTC timestamp>-<hash>`` (with a numeric suffix on collision)."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
    path = root / f"{stamp}-{content_hash}"
    k = 1
    while path.exists():
        path = root / f"{stamp}-{content_hash}-{k}"
        k += 1
    path.mkdir()
    return path


def cell_seed(seed: int, alpha: float, p: float, amplitude: float) -> int:
    """Seed of one sweep cell, a function of the base seed and the cell coordinates only."""
    key = f"{seed}:{alpha!r}:{p!r}:{amplitude!r}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


# -- single runs ----------------------------------------------------------------


@dataclass
class RunArtifacts:
    result: RunResult
    directory: Path | None
    files: dict[str, Path] = field(default_factory=dict)


def _execute(cfg: ExperimentConfig, alpha: float, p: float, amplitude: float, seed: int) -> RunResult:
    params = cfg.params(p=p, alpha=alpha)
    grid = cfg.grid()
    u0 = cfg.initial_field(grid, amplitude=amplitude, seed=seed)
    return evolve(u0, params, cfg.solver)


def run_single(cfg: ExperimentConfig, out: str | Path | None = None, write: bool = True) -> RunArtifacts:
    """Evolve the first cell of ``cfg`` and write its artifacts.

    Writes ``result.json``, ``history.csv``, ``snapshots.npz`` (when the
    solver stores snapshots), ``config.json`` and ``plot_history.py`` into a
    fresh run directory under ``out`` (default: the configured directory).
    """
    alpha, p, amp = cfg.cells()[0]
    result = _execute(cfg, alpha, p, amp, cfg.seed)
    if not write:
        return RunArtifacts(result, None)
    directory = new_run_directory(out or cfg.outputs.directory, cfg.content_hash())
    files = write_run(result, cfg, directory)
    return RunArtifacts(result, directory, files)


def write_run(result: RunResult, cfg: ExperimentConfig, directory: Path) -> dict[str, Path]:
    files = {}
    formats = cfg.outputs.formats
    if "json" in formats:
        files["json"] = _write(directory / "result.json", result.to_json())
    if "csv" in formats:
        files["csv"] = _write(directory / "history.csv", result.history_csv())
    if cfg.outputs.snapshots and result.snapshots is not None:
        files["snapshots"] = directory / "snapshots.npz"
        np.savez(files["snapshots"], times=result.snapshot_times, values=result.snapshots)
    if "npz" in formats:
        files["npz"] = directory / "history.npz"
        np.savez(files["npz"], **result.history)
    files["config"] = _write(directory / "config.json", json.dumps(cfg.to_dict(), indent=1, sort_keys=True))
    if cfg.outputs.plot_script:
        files["plot"] = _write(directory / "plot_history.py", history_plot_script(result))
    return files


def load_run(directory: str | Path, grid: Grid | None = None) -> tuple[RunResult, Grid]:
    """Read ``result.json`` and, when present, ``snapshots.npz`` from a run directory."""
    directory = Path(directory)
    result = RunResult.from_json((directory / "result.json").read_text())
    g = result.grid
    grid = grid or Grid(int(g["n"]), float(g["box_length"]), int(g["points_per_axis"]))
    snaps = directory / "snapshots.npz"
    if snaps.exists():
        with np.load(snaps) as data:
            result.snapshot_times = data["times"]
            result.snapshots = data["values"]
    return result, grid


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


# -- sweeps ------------------------------------------------------------------------


@dataclass
class PhaseCell:
    alpha: float
    p: float
    amplitude: float
    classification: str
    t_blowup: float | None
    reason: str
    seed: int


@dataclass
class PhaseDiagram:
    """Classified sweep cells plus the threshold curves ``p_fuj(alpha)`` and ``p_sc(alpha)``."""

    n: int
    beta: float
    alpha_values: tuple[float, ...]
    p_values: tuple[float, ...]
    amplitude_values: tuple[float, ...]
    cells: list[PhaseCell]
    curves: list[dict]

    def curve(self, alpha: float) -> dict:
        return next(c for c in self.curves if c["alpha"] == alpha)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PHASE_COLUMNS)
        for c in self.cells:
            cur = self.curve(c.alpha)
            tb = "" if c.t_blowup is None else repr(float(c.t_blowup))
            w.writerow([repr(c.alpha), repr(c.p), repr(c.amplitude), c.classification, tb, repr(cur["p_fuj"]), repr(cur["p_sc"]), c.reason])
        return buf.getvalue()

    def curves_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("alpha", "p_fuj", "p_sc"))
        for c in self.curves:
            w.writerow([repr(c["alpha"]), repr(c["p_fuj"]), repr(c["p_sc"])])
        return buf.getvalue()

    def bands(self) -> list[dict]:
        """Empirical transition band in ``p`` per ``(alpha, amplitude)``.

        ``lower`` is the largest ``p`` below every global cell that blew up,
        ``upper`` the smallest ``p`` classified global; either may be None.
        """
        out = []
        for a in self.alpha_values:
            cur = self.curve(a)
            for amp in self.amplitude_values:
                row = sorted((c for c in self.cells if c.alpha == a and c.amplitude == amp), key=lambda c: c.p)
                glob = [c.p for c in row if c.classification == "global_decay"]
                upper = min(glob) if glob else None
                blow = [c.p for c in row if c.classification == "blowup" and (upper is None or c.p < upper)]
                lower = max(blow) if blow else None
                unresolved = [c.p for c in row if c.classification not in ("blowup", "global_decay")]
                contains = None
                if lower is not None and upper is not None:
                    contains = lower <= cur["p_fuj"] <= upper
                out.append(
                    {
                        "alpha": a,
                        "amplitude": amp,
                        "lower": lower,
                        "upper": upper,
                        "unresolved": unresolved,
                        "p_fuj": cur["p_fuj"],
                        "p_sc": cur["p_sc"],
                        "contains_p_fuj": contains,
                    }
                )
        return out

    def summary(self) -> str:
        """Plain-text dichotomy summary."""
        lines = [f"dichotomy summary (n={self.n}, beta={self.beta:g})"]
        for b in self.bands():
            head = f"alpha={b['alpha']:g} amplitude={b['amplitude']:g}: p_sc={b['p_sc']:.4g}, p_fuj={b['p_fuj']:.4g}; "
            lo = "none" if b["lower"] is None else f"{b['lower']:g}"
            hi = "none" if b["upper"] is None else f"{b['upper']:g}"
            if b["lower"] is not None and b["upper"] is not None:
                where = "contains" if b["contains_p_fuj"] else "does not contain"
                body = f"transition band ({lo}, {hi}] {where} p_fuj"
            else:
                body = f"no bracket (largest blow-up p: {lo}, smallest global p: {hi})"
            lines.append(head + body)
            quiet = [
                c.p
                for c in self.cells
                if c.alpha == b["alpha"]
                and c.amplitude == b["amplitude"]
                and b["p_sc"] < c.p < b["p_fuj"]
                and c.classification != "blowup"
            ]
            if quiet:
                ps = ", ".join(f"{p:g}" for p in quiet)
                lines.append(f"  p in (p_sc, p_fuj) = {{{ps}}}: no blow-up observed within horizon")
            rest = [p for p in b["unresolved"] if p not in quiet]
            if rest:
                lines.append("  unresolved cells at p = " + ", ".join(f"{p:g}" for p in rest))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "beta": self.beta,
            "alpha_values": list(self.alpha_values),
            "p_values": list(self.p_values),
            "amplitude_values": list(self.amplitude_values),
            "cells": [asdict(c) for c in self.cells],
            "curves": self.curves,
            "bands": self.bands(),
        }


def _sweep_cell(args) -> PhaseCell:
    cfg, alpha, p, amp = args
    seed = cell_seed(cfg.seed, alpha, p, amp)
    try:
        res = _execute(cfg, alpha, p, amp, seed)
        cls, reason = res.classification, res.reason
        params = cfg.params(p=p, alpha=alpha)
        if cls == "global_decay" and params.nonlinearity == "riesz" and amp > 0:
            # positive data must blow up for p <= p_fuj; a quiet horizon proves nothing
            if p <= critical_exponents(cfg.n, params.beta, alpha).p_fuj:
                cls, reason = "inconclusive", "no blow-up observed within horizon"
        return PhaseCell(alpha, p, amp, cls, res.t_blowup, reason, seed)
    except (FujitaLabError, FloatingPointError) as exc:
        return PhaseCell(alpha, p, amp, "error", None, f"{type(exc).__name__}: {exc}", seed)


def sweep(cfg: ExperimentConfig, workers: int = 1, out: str | Path | None = None, write: bool = True):
    """Run every ``(alpha, p, amplitude)`` cell and build the phase diagram.

    Cells are independent tasks; results are merged in grid order so the
    emitted files do not depend on ``workers``.  A failing cell is recorded
    with classification ``error`` and the sweep continues.

    Returns
    -------
    (PhaseDiagram, Path or None)
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    tasks = [(cfg, a, p, amp) for a, p, amp in cfg.cells()]
    if workers == 1 or len(tasks) == 1:
        cells = [_sweep_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            cells = list(pool.map(_sweep_cell, tasks))
    params = cfg.params()
    curves = []
    for a in cfg.alpha_values:
        ex = critical_exponents(cfg.n, params.beta, a)
        curves.append({"alpha": a, "p_fuj": ex.p_fuj, "p_sc": ex.p_sc})
    diagram = PhaseDiagram(cfg.n, params.beta, cfg.alpha_values, cfg.p_values, cfg.amplitude_values, cells, curves)
    if not write:
        return diagram, None
    directory = new_run_directory(out or cfg.outputs.directory, cfg.content_hash())
    _write(directory / "phase.csv", diagram.to_csv())
    _write(directory / "curves.csv", diagram.curves_csv())
    _write(directory / "summary.txt", diagram.summary())
    _write(directory / "phase.json", json.dumps(diagram.to_dict(), indent=1, sort_keys=True))
    _write(directory / "config.json", json.dumps(cfg.to_dict(), indent=1, sort_keys=True))
    if cfg.outputs.plot_script:
        _write(directory / "plot_phase.py", PHASE_PLOT_SCRIPT)
    return diagram, directory


# -- audits --------------------------------------------------------------------------


@dataclass
class AuditArtifacts:
    reports: list
    verdict: CapacityVerdict
    directory: Path | None


def audit_pairs(cfg: ExperimentConfig, grid: Grid, t_last: float, beta: float) -> list[tuple[float, float]]:
    """``(R, T)`` pairs for the configured audit mode."""
    opts = cfg.audit
    Ts = opts.T or tuple(f * t_last for f in (0.25, 0.5, 0.75, 0.95))
    if opts.mode == "subcritical":
        return [(T ** (1 / beta), T) for T in Ts]
    Rs = opts.R or tuple(grid.L / opts.padding / 2**k for k in (2, 1, 0))
    if opts.mode == "critical":
        # R values are read as K = R^beta / T
        return [((K * T) ** (1 / beta), T) for K in Rs for T in Ts]
    return [(R, T) for R in Rs for T in Ts]


def audit(cfg: ExperimentConfig, run_dir: str | Path, out: str | Path | None = None, write: bool = True) -> AuditArtifacts:
    """Capacity integrals and the inequality verdict on a stored run.

    Raises
    ------
    NeedsDenserTrajectoryError
        The run has no field snapshots, or too few inside some window.
    """
    result, grid = load_run(run_dir)
    if result.snapshots is None or len(result.snapshot_times) < 2:
        raise NeedsDenserTrajectoryError(
            f"run {run_dir} stores no field snapshots; rerun with solver.snapshot_interval set "
            f"(at most T/{cfg.audit.min_intervals} for the smallest audited T)"
        )
    params = cfg.params(p=result.params.get("p"), alpha=result.params.get("alpha"))
    traj = Trajectory.from_run(result, grid)
    t_last = float(result.snapshot_times[-1])
    reports = []
    for R, T in audit_pairs(cfg, grid, t_last, params.beta):
        tf = build_test_function(params.p, R, T, grid, params.beta, padding=cfg.audit.padding)
        reports.append(capacity_integrals(traj, tf, params, min_intervals=cfg.audit.min_intervals))
    if cfg.audit.mode == "grid":
        vacuous = all(r.I == 0.0 and r.data_term == 0.0 for r in reports)
        verdict = CapacityVerdict(
            "grid",
            vacuous,
            all(r.holds for r in reports),
            all(r.lower_bound_holds for r in reports),
            interpretation="vacuous pass: zero trajectory" if vacuous else "",
        )
    else:
        verdict = verify_capacity_inequality(reports, params, cfg.audit.mode, cfg.audit.slope_margin)
    if not write:
        return AuditArtifacts(reports, verdict, None)
    directory = Path(out) if out else Path(run_dir)
    directory.mkdir(parents=True, exist_ok=True)
    doc = {"reports": [r.to_dict() for r in reports], "verdict": verdict.to_dict()}
    _write(directory / "capacity.json", json.dumps(_finite(doc), indent=1, sort_keys=True))
    _write(directory / "capacity.csv", reports_to_csv(reports))
    return AuditArtifacts(reports, verdict, directory)


def _finite(obj):
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


# -- plot scripts ---------------------------------------------------------------------


def history_plot_script(result: RunResult) -> str:
    """Stand-alone matplotlib script plotting the norm histories of a run."""
    p = result.params
    notes = [f"p = {p.get('p'):g}"]
    if p.get("nonlinearity") == "riesz":
        ex = critical_exponents(int(p["n"]), float(p["beta"]), float(p["alpha"]))
        notes += [f"p_fuj = {ex.p_fuj:.4g}", f"p_sc = {ex.p_sc:.4g}"]
    title = f"{result.classification}: " + ", ".join(notes)
    return _HISTORY_TEMPLATE.replace("@TITLE@", repr(title))


_HISTORY_TEMPLATE = '''"""Plot the norm histories stored next to this script (needs matplotlib)."""
import csv
import pathlib

import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "history.csv") as fh:
    rows = list(csv.DictReader(fh))
t = [float(r["t"]) for r in rows]
fig, ax = plt.subplots()
for key in ("linf", "ls", "lqsc", "weighted"):
    ys = [float(r[key]) for r in rows]
    if any(y == y for y in ys):
        ax.plot(t, ys, label=key)
if all(float(r["linf"]) > 0 for r in rows):
    ax.set_yscale("log")
ax.set_xlabel("t")
ax.set_title(@TITLE@)
ax.legend()
fig.savefig(here / "history.png", dpi=120)
'''

PHASE_PLOT_SCRIPT = '''"""Plot the phase diagram stored next to this script (needs matplotlib)."""
import csv
import pathlib

import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "phase.csv") as fh:
    cells = list(csv.DictReader(fh))
with open(here / "curves.csv") as fh:
    curves = list(csv.DictReader(fh))
alphas = sorted({float(c["alpha"]) for c in cells})
x_key = "alpha" if len(alphas) > 1 else "amplitude"
colors = {"blowup": "tab:red", "global_decay": "tab:blue", "inconclusive": "tab:gray", "error": "black"}
fig, ax = plt.subplots()
for label, color in colors.items():
    sel = [c for c in cells if c["classification"] == label]
    if sel:
        ax.scatter([float(c[x_key]) for c in sel], [float(c["p"]) for c in sel], c=color, label=label)
if x_key == "alpha":
    a = [float(c["alpha"]) for c in curves]
    ax.plot(a, [float(c["p_fuj"]) for c in curves], "k-", label="p_fuj")
    ax.plot(a, [float(c["p_sc"]) for c in curves], "k--", label="p_sc")
else:
    ax.axhline(float(curves[0]["p_fuj"]), color="k", label="p_fuj")
    ax.axhline(float(curves[0]["p_sc"]), color="k", ls="--", label="p_sc")
ax.set_xlabel(x_key)
ax.set_ylabel("p")
ax.legend()
fig.savefig(here / "phase.png", dpi=120)
'''
