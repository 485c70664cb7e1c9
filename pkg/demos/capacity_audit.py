"""
Auditing a blow-up run with test functions
==========================================

Multiplying the equation by ``phi_R(x)^l phi_T(t)^l`` and integrating gives an
inequality between the source term and two test-function integrals ``J1`` and
``J2``.  A run that blows up must satisfy it at every ``(R, T)`` up to the
blow-up time.  This script stores one such run and evaluates every term.
"""

import math

import numpy as np

from fujita_lab import EquationParams, Grid, SolverConfig, Trajectory, build_test_function, capacity_integrals, evolve
from fujita_lab.capacity import predicted_exponents, test_function_scaling

grid = Grid(1, 64.0, 1024)
params = EquationParams(p=3.0, alpha=0.5)
u0 = grid.sample(lambda x: np.exp(-(x**2) / 2) / math.sqrt(2 * math.pi))
run = evolve(u0, params, SolverConfig(t_end=50.0, snapshot_interval=0.025))
print(f"{run.classification} at T* = {run.t_blowup:.4f}, {len(run.snapshot_times)} snapshots")

traj = Trajectory.from_run(run, grid)
t_last = float(run.snapshot_times[-1])
print(f"{'R':>5} {'T':>8} {'lhs':>11} {'rhs':>11} {'identity':>10}  holds")
for frac in (0.2, 0.6, 0.95):
    for R in (4.0, 16.0):
        rep = capacity_integrals(traj, build_test_function(3.0, R, frac * t_last, grid, 2.0), params)
        print(f"{R:5g} {rep.T:8.4f} {rep.lhs_full:11.4e} {rep.rhs:11.4e} {rep.identity_residual:10.2e}  {rep.holds}")

# J1 and J2 are pure powers of R and T
fits = test_function_scaling(3.0, 2.0, Grid(1, 256.0, 2048), [8, 16, 32, 64], [1, 2, 4, 8], 16.0, 4.0)
for key, expected in predicted_exponents(3.0, 1, 2.0).items():
    print(f"{key}: fitted {fits[key].exponent:+.4f}, expected {expected:+.4f}")
