"""
fujita_lab: pseudospectral experiments for ``u_t + (-Delta)^(beta/2) u = I_alpha(|u|^p)``
and its kernel variant ``K * |u|^p`` on periodic boxes.

Submodules
----------
grid        periodic grids, fields and normalized FFTs
operators   fractional Laplacian, Riesz potentials, principal-value oracle
kernels     radial convolution kernels
equation    parameters of the equation and its source term
propagator  semigroup, ETD stepping, Picard local solver
dynamics    adaptive runs, blow-up detection, scaling family
exponents   critical exponents
capacity    test-function integrals, capacity inequality, kernel conditions
config      experiment configuration files
experiments single runs, sweeps, audits and their artifacts
checks      end-to-end checks behind ``fujita-lab verify``
"""

from .capacity import (
    CapacityReport,
    Trajectory,
    build_test_function,
    capacity_integrals,
    kernel_limit_conditions,
    verify_capacity_inequality,
)
from .config import ExperimentConfig, load_config, parse_config
from .dynamics import RunResult, SolverConfig, evolve, scaling_transform, weighted_norm_track
from .equation import EquationParams
from .errors import (
    BlowUpSignal,
    ConfigError,
    FieldOverflowError,
    FujitaLabError,
    KernelError,
    LocalSolveFailure,
    NeedsDenserTrajectoryError,
    ParameterError,
    RegressionError,
    SymmetryError,
)
from .experiments import audit, run_single, sweep
from .exponents import CriticalExponents, critical_exponents
from .grid import Field, Grid, lp_norm, transform_backward, transform_forward
from .kernels import ConvolutionKernel
from .operators import RieszKernel, frac_laplacian_apply, frac_laplacian_pv, riesz_apply
from .propagator import etd_step, picard_solve_local, semigroup_apply

__version__ = "0.1.0"

__all__ = [
    "BlowUpSignal",
    "CapacityReport",
    "ConfigError",
    "ConvolutionKernel",
    "CriticalExponents",
    "EquationParams",
    "ExperimentConfig",
    "Field",
    "FieldOverflowError",
    "FujitaLabError",
    "Grid",
    "KernelError",
    "LocalSolveFailure",
    "NeedsDenserTrajectoryError",
    "ParameterError",
    "RegressionError",
    "RieszKernel",
    "RunResult",
    "SolverConfig",
    "SymmetryError",
    "Trajectory",
    "audit",
    "build_test_function",
    "capacity_integrals",
    "critical_exponents",
    "etd_step",
    "evolve",
    "frac_laplacian_apply",
    "frac_laplacian_pv",
    "kernel_limit_conditions",
    "load_config",
    "lp_norm",
    "parse_config",
    "picard_solve_local",
    "riesz_apply",
    "run_single",
    "scaling_transform",
    "semigroup_apply",
    "sweep",
    "transform_backward",
    "transform_forward",
    "verify_capacity_inequality",
    "weighted_norm_track",
]
