"""
Experiment configuration files.

A configuration is a TOML document with the blocks ``[equation]``,
``[grid]``, ``[initial]``, ``[solver]``, ``[outputs]`` and ``[audit]`` plus
the top-level keys ``version`` and ``seed``.  Every key is optional except
where noted in :data:`SCHEMA`.  Validation happens at load time and errors
carry the dotted key and its line in the source.

Example
-------
::

    version = 1
    seed = 7

    [equation]
    n = 1
    beta = 2.0
    alpha = 0.5
    p_grid = [2, 3, 4, 5, 6.5, 8, 10]

    [initial]
    family = "gaussian"
    amplitude = 0.3
    width = 1.0

    [solver]
    t_end = 50.0
"""

from __future__ import annotations

import hashlib
import json
import re
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .dynamics import SolverConfig
from .equation import EquationParams
from .errors import ConfigError, FujitaLabError
from .grid import Field, Grid
from .kernels import ConvolutionKernel, load_kernel_table

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "CONFIG_VERSION",
    "SCHEMA",
    "ExperimentConfig",
    "InitialData",
    "OutputOptions",
    "AuditOptions",
    "load_config",
    "parse_config",
    "initial_field",
]

CONFIG_VERSION = 1

FAMILIES = ("gaussian", "bump", "power_decay", "constant", "table", "random")
KERNELS = ("exponential", "riesz_cutoff", "constant")

# block -> key -> accepted python types
SCHEMA: dict[str, dict[str, tuple[type, ...]]] = {
    "": {"version": (int,), "seed": (int,)},
    "equation": {
        "n": (int,),
        "beta": (int, float),
        "alpha": (int, float),
        "alpha_grid": (list,),
        "p": (int, float),
        "p_grid": (list,),
        "nonlinearity": (str,),
        "kernel": (str,),
        "kernel_table": (str,),
        "kernel_length": (int, float),
        "coupling": (int, float),
        "riesz_mode": (str,),
        "zero_mode": (str,),
    },
    "grid": {"box_length": (int, float), "points": (int,)},
    "initial": {
        "family": (str,),
        "amplitude": (int, float),
        "amplitude_grid": (list,),
        "mass": (int, float),
        "width": (int, float),
        "gamma": (int, float),
        "path": (str,),
    },
    "solver": {f.name: (int, float) for f in fields(SolverConfig)},
    "outputs": {"directory": (str,), "formats": (list,), "plot_script": (bool,), "snapshots": (bool,)},
    "audit": {
        "R": (list,),
        "T": (list,),
        "mode": (str,),
        "padding": (int, float),
        "min_intervals": (int,),
        "slope_margin": (int, float),
    },
}


@dataclass(frozen=True)
class InitialData:
    """Initial-data family.

    ``power_decay`` is ``amplitude * (1 + |x/width|^2)^(-gamma/2)``; ``bump``
    is a smooth compactly supported profile of radius ``width`` and peak
    ``amplitude``; ``random`` superposes seeded Gaussians; ``table`` reads
    ``path`` (``.npy`` with the grid shape, or two text columns ``x u`` in 1-D).
    When ``mass`` is set the field is rescaled to that integral.
    """

    family: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    gamma: float = 1.0
    mass: float | None = None
    path: str | None = None


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "runs"
    formats: tuple[str, ...] = ("json", "csv")
    plot_script: bool = True
    snapshots: bool = True


@dataclass(frozen=True)
class AuditOptions:
    """Capacity audit grid; empty ``R``/``T`` select defaults from the run."""

    R: tuple[float, ...] = ()
    T: tuple[float, ...] = ()
    mode: str = "grid"
    padding: float = 4.0
    min_intervals: int = 32
    slope_margin: float = 0.1


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration of a run, sweep or audit."""

    equation: dict
    box_length: float
    points: int
    initial: InitialData
    solver: SolverConfig
    outputs: OutputOptions = field(default_factory=OutputOptions)
    audit: AuditOptions = field(default_factory=AuditOptions)
    seed: int = 0
    p_values: tuple[float, ...] = ()
    alpha_values: tuple[float, ...] = ()
    amplitude_values: tuple[float, ...] = ()
    base_dir: str = "."

    @property
    def n(self) -> int:
        return int(self.equation.get("n", 1))

    @property
    def is_sweep(self) -> bool:
        return len(self.cells()) > 1

    def grid(self) -> Grid:
        return Grid(self.n, self.box_length, self.points)

    def cells(self) -> list[tuple[float, float, float]]:
        """``(alpha, p, amplitude)`` triples in row-major order."""
        return [(a, p, amp) for a in self.alpha_values for p in self.p_values for amp in self.amplitude_values]

    def params(self, p: float | None = None, alpha: float | None = None) -> EquationParams:
        eq = self.equation
        kernel = None
        nonlin = eq.get("nonlinearity", "riesz")
        if nonlin == "kernel":
            kernel = _build_kernel(eq, self.n, self.base_dir)
        return EquationParams(
            n=self.n,
            beta=float(eq.get("beta", 2.0)),
            p=float(self.p_values[0] if p is None else p),
            nonlinearity=nonlin,
            alpha=float(self.alpha_values[0] if alpha is None else alpha),
            kernel=kernel,
            riesz_mode=eq.get("riesz_mode", "multiplier"),
            zero_mode=eq.get("zero_mode", "explicit"),
            coupling=float(eq.get("coupling", 1.0)),
            dealias_fraction=self.solver.dealias_fraction,
        )

    def initial_field(self, grid: Grid | None = None, amplitude: float | None = None, seed: int | None = None) -> Field:
        init = self.initial if amplitude is None else replace(self.initial, amplitude=float(amplitude))
        return initial_field(init, grid or self.grid(), self.seed if seed is None else seed, self.base_dir)

    def to_dict(self) -> dict:
        """Canonical, fully resolved form (also the input of :meth:`content_hash`)."""
        d = {
            "version": CONFIG_VERSION,
            "seed": self.seed,
            "equation": dict(self.equation),
            "grid": {"box_length": self.box_length, "points": self.points},
            "initial": {k: v for k, v in asdict(self.initial).items() if v is not None},
            "solver": {k: v for k, v in asdict(self.solver).items() if v is not None},
            "outputs": asdict(self.outputs),
            "audit": asdict(self.audit),
        }
        d["equation"]["p_grid"] = list(self.p_values)
        d["equation"]["alpha_grid"] = list(self.alpha_values)
        d["initial"]["amplitude_grid"] = list(self.amplitude_values)
        for k in ("p", "alpha"):
            d["equation"].pop(k, None)
        d["initial"].pop("amplitude", None)
        for block in ("outputs", "audit"):
            d[block] = {k: list(v) if isinstance(v, tuple) else v for k, v in d[block].items()}
        return d

    def content_hash(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def with_seed(self, seed: int) -> "ExperimentConfig":
        _check_seed(seed, None, None)
        return replace(self, seed=int(seed))


# -- loading ----------------------------------------------------------------


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    return parse_config(text, base_dir=str(path.parent))


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        Syntax errors, unknown keys, wrong types and violated cross-field
        constraints, with the key's line when it can be located.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"syntax error: {exc}", line=int(m.group(1)) if m else None) from exc
    lines = _KeyLines(text)

    def fail(msg, key):
        raise ConfigError(msg, field=key, line=lines.find(key))

    for block, value in raw.items():
        if isinstance(value, dict):
            if block not in SCHEMA or block == "":
                fail(f"unknown block [{block}]", block)
            items = [(f"{block}.{k}", k, v, SCHEMA[block]) for k, v in value.items()]
        else:
            items = [(block, block, value, SCHEMA[""])]
        for dotted, key, v, allowed in items:
            if key not in allowed:
                fail(f"unknown key {key!r}", dotted)
            if isinstance(v, bool) and bool not in allowed[key]:
                fail(f"expected {_type_names(allowed[key])}, got a boolean", dotted)
            if not isinstance(v, allowed[key]):
                fail(f"expected {_type_names(allowed[key])}, got {type(v).__name__}", dotted)

    version = raw.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        fail(f"unsupported configuration version {version} (this build reads {CONFIG_VERSION})", "version")
    seed = raw.get("seed", 0)
    _check_seed(seed, "seed", lines.find("seed"))

    eq = dict(raw.get("equation", {}))
    n = eq.get("n", 1)
    if n not in (1, 2):
        fail(f"n must be 1 or 2, got {n}", "equation.n")
    beta = eq.get("beta", 2.0)
    if not 0 < beta <= 2:
        fail(f"beta must lie in (0, 2], got {beta}", "equation.beta")
    nonlin = eq.get("nonlinearity", "riesz")
    if nonlin not in ("riesz", "kernel", "local"):
        fail(f"nonlinearity must be riesz, kernel or local, got {nonlin!r}", "equation.nonlinearity")
    if nonlin == "kernel":
        if ("kernel" in eq) == ("kernel_table" in eq):
            fail("kernel nonlinearity needs exactly one of 'kernel' and 'kernel_table'", "equation.kernel")
        if "kernel" in eq and eq["kernel"] not in KERNELS:
            fail(f"kernel must be one of {', '.join(KERNELS)}, got {eq['kernel']!r}", "equation.kernel")
    elif "kernel" in eq or "kernel_table" in eq:
        key = "equation.kernel" if "kernel" in eq else "equation.kernel_table"
        fail(f"kernel given but nonlinearity is {nonlin!r}", key)

    alphas = _scalar_or_grid(eq, "alpha", 0.0 if nonlin == "local" else 0.5, fail, "equation")
    for a in alphas:
        key = "equation.alpha_grid" if "alpha_grid" in eq else "equation.alpha"
        if nonlin == "local":
            if a != 0:
                fail("alpha must be 0 for the local nonlinearity", key)
        elif not 0 < a < n:
            fail(f"alpha must satisfy 0 < alpha < n = {n}, got {a:g}", key)
    ps = _scalar_or_grid(eq, "p", 3.0, fail, "equation")
    for p in ps:
        if not p > 1:
            fail(f"p must exceed 1, got {p:g}", "equation.p_grid" if "p_grid" in eq else "equation.p")

    g = raw.get("grid", {})
    box = float(g.get("box_length", 64.0))
    points = g.get("points", 512)
    if not box > 0:
        fail(f"box_length must be positive, got {box:g}", "grid.box_length")
    if points < 8 or points % 2:
        fail(f"points must be an even integer >= 8, got {points}", "grid.points")

    ini = dict(raw.get("initial", {}))
    family = ini.get("family", "gaussian")
    if family not in FAMILIES:
        fail(f"family must be one of {', '.join(FAMILIES)}, got {family!r}", "initial.family")
    amps = _scalar_or_grid(ini, "amplitude", 1.0, fail, "initial")
    if "mass" in ini and ("amplitude" in ini or "amplitude_grid" in ini):
        fail("give either mass or amplitude, not both", "initial.mass")
    for key in ("width", "gamma"):
        if key in ini and not ini[key] > 0:
            fail(f"{key} must be positive, got {ini[key]:g}", f"initial.{key}")
    if family == "table" and "path" not in ini:
        fail("family 'table' needs a path", "initial.family")
    initial = InitialData(
        family=family,
        width=float(ini.get("width", 1.0)),
        gamma=float(ini.get("gamma", 1.0)),
        mass=None if "mass" not in ini else float(ini["mass"]),
        path=ini.get("path"),
        amplitude=float(amps[0]),
    )

    solver_raw = raw.get("solver", {})
    try:
        solver = SolverConfig(**{k: (int(v) if k in ("growth_window", "max_steps") else float(v)) for k, v in solver_raw.items()})
    except FujitaLabError as exc:
        key = _first_key_in(str(exc), solver_raw) or next(iter(solver_raw), None)
        fail(str(exc), f"solver.{key}" if key else "solver")

    out_raw = raw.get("outputs", {})
    formats = tuple(out_raw.get("formats", ("json", "csv")))
    for f in formats:
        if f not in ("json", "csv", "npz"):
            fail(f"unknown output format {f!r} (json, csv, npz)", "outputs.formats")
    outputs = OutputOptions(
        directory=out_raw.get("directory", "runs"),
        formats=formats,
        plot_script=out_raw.get("plot_script", True),
        snapshots=out_raw.get("snapshots", True),
    )

    au = raw.get("audit", {})
    for key in ("R", "T"):
        vals = au.get(key, [])
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in vals):
            fail(f"{key} must be a list of positive numbers", f"audit.{key}")
    if au.get("mode", "grid") not in ("grid", "subcritical", "critical"):
        fail(f"mode must be grid, subcritical or critical, got {au['mode']!r}", "audit.mode")
    audit = AuditOptions(
        R=tuple(float(v) for v in au.get("R", [])),
        T=tuple(float(v) for v in au.get("T", [])),
        mode=au.get("mode", "grid"),
        padding=float(au.get("padding", 4.0)),
        min_intervals=int(au.get("min_intervals", 32)),
        slope_margin=float(au.get("slope_margin", 0.1)),
    )

    cfg = ExperimentConfig(
        equation={k: v for k, v in eq.items() if k not in ("p_grid", "alpha_grid")},
        box_length=box,
        points=int(points),
        initial=initial,
        solver=solver,
        outputs=outputs,
        audit=audit,
        seed=int(seed),
        p_values=tuple(ps),
        alpha_values=tuple(alphas),
        amplitude_values=tuple(amps),
        base_dir=base_dir,
    )
    # remaining cross-field checks live in the constructors
    for a in alphas:
        for p in ps:
            try:
                cfg.params(p=p, alpha=a)
            except ConfigError:
                raise
            except (FujitaLabError, OSError) as exc:
                key = "equation.kernel_table" if "kernel_table" in eq else "equation"
                fail(str(exc), key)
    return cfg


def _check_seed(seed, key, line):
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an integer in [0, 2^64), got {seed!r}", field=key, line=line)


def _type_names(types) -> str:
    names = {int: "integer", float: "number", str: "string", list: "array", bool: "boolean"}
    return " or ".join(names[t] for t in types)


def _scalar_or_grid(block: dict, key: str, default: float, fail, prefix: str) -> list[float]:
    grid_key = f"{key}_grid"
    if key in block and grid_key in block:
        fail(f"give either {key} or {grid_key}, not both", f"{prefix}.{grid_key}")
    if grid_key in block:
        vals = block[grid_key]
        if not vals:
            fail(f"{grid_key} must not be empty", f"{prefix}.{grid_key}")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            fail(f"{grid_key} must contain numbers only", f"{prefix}.{grid_key}")
        return [float(v) for v in vals]
    return [float(block.get(key, default))]


def _first_key_in(message: str, keys) -> str | None:
    for k in keys:
        if k in message:
            return k
    return None


class _KeyLines:
    """Line numbers of ``key = value`` entries, keyed by dotted name."""

    _header = re.compile(r"^\s*\[\s*([A-Za-z0-9_.\-]+)\s*\]")
    _assign = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")

    def __init__(self, text: str):
        self.lines: dict[str, int] = {}
        block = ""
        for i, line in enumerate(text.splitlines(), start=1):
            m = self._header.match(line)
            if m:
                block = m.group(1)
                self.lines.setdefault(block, i)
                continue
            m = self._assign.match(line)
            if m:
                dotted = f"{block}.{m.group(1)}" if block else m.group(1)
                self.lines.setdefault(dotted, i)

    def find(self, dotted: str | None) -> int | None:
        if dotted is None:
            return None
        if dotted in self.lines:
            return self.lines[dotted]
        # fall back to a sibling grid key or the enclosing block
        for alt in (dotted + "_grid", dotted.removesuffix("_grid"), dotted.split(".")[0]):
            if alt in self.lines:
                return self.lines[alt]
        return None


# -- initial data and kernels -------------------------------------------------


def _build_kernel(eq: dict, n: int, base_dir: str) -> ConvolutionKernel:
    if "kernel_table" in eq:
        path = Path(eq["kernel_table"])
        if not path.is_absolute():
            path = Path(base_dir) / path
        return load_kernel_table(path, n=n)
    length = float(eq.get("kernel_length", 1.0))
    name = eq["kernel"]
    if name == "exponential":
        return ConvolutionKernel.exponential(n, length)
    if name == "riesz_cutoff":
        return ConvolutionKernel.riesz_exponential_cutoff(float(eq.get("alpha", 0.5)), n, length)
    return ConvolutionKernel.constant(1.0, n)


def initial_field(init: InitialData, grid: Grid, seed: int = 0, base_dir: str = ".") -> Field:
    """Sample an initial-data family on ``grid``."""
    r2 = sum(x**2 for x in grid.coords)
    a, w = init.amplitude, init.width
    if init.family == "gaussian":
        vals = a * np.exp(-r2 / (2 * w**2))
    elif init.family == "bump":
        s = 1 - r2 / w**2
        vals = np.zeros(grid.shape)
        inside = s > 0
        vals[inside] = a * np.exp(1 - 1 / s[inside])
    elif init.family == "power_decay":
        vals = a * (1 + r2 / w**2) ** (-init.gamma / 2)
    elif init.family == "constant":
        vals = np.full(grid.shape, a)
    elif init.family == "random":
        vals = _random_field(grid, a, w, seed)
    else:
        vals = _table_field(init.path, grid, base_dir)
    vals = np.asarray(vals, dtype=float)
    if init.mass is not None:
        total = vals.sum() * grid.cell_volume
        if total == 0:
            raise ConfigError("cannot rescale zero initial data to a mass", field="initial.mass")
        vals = vals * (init.mass / total)
    return Field(grid, vals)


def _random_field(grid: Grid, amplitude: float, width: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    vals = np.zeros(grid.shape)
    for _ in range(8):
        c = rng.uniform(-grid.L / 8, grid.L / 8, size=grid.n)
        s = width * rng.uniform(0.5, 2.0)
        r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
        vals += rng.uniform(0.2, 1.0) * np.exp(-r2 / (2 * s**2))
    peak = vals.max()
    return amplitude * vals / peak if peak > 0 else vals


def _table_field(path: str, grid: Grid, base_dir: str) -> np.ndarray:
    p = Path(path)
    if not p.is_absolute():
        p = Path(base_dir) / p
    try:
        if p.suffix == ".npy":
            vals = np.load(p)
            if vals.shape != grid.shape:
                raise ConfigError(f"table has shape {vals.shape}, grid needs {grid.shape}", field="initial.path")
            return vals
        data = np.loadtxt(p, ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read initial-data table: {exc}", field="initial.path") from exc
    if grid.n != 1 or data.shape[1] != 2:
        raise ConfigError("text tables hold two columns 'x u' and are 1-D only", field="initial.path")
    order = np.argsort(data[:, 0])
    return np.interp(grid.x_axis, data[order, 0], data[order, 1], left=0.0, right=0.0)
