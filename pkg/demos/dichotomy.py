"""
Blow-up or global decay
=======================

For ``n = 1``, ``beta = 2`` and ``alpha = 0.5`` the critical exponents are
``p_sc = 3.5`` and ``p_fuj = 6``.  Below ``p_fuj`` every positive solution
blows up; above it small data decay.  Three runs show the two regimes and
the range ``(p_sc, p_fuj)`` where the blow-up time is not set by scaling.
"""

import math

import numpy as np

from fujita_lab import EquationParams, Grid, SolverConfig, critical_exponents, evolve, weighted_norm_track

ex = critical_exponents(1, 2.0, 0.5)
print(ex.table())
print()

grid = Grid(1, 64.0, 512)


def gaussian(amp, sigma):
    return grid.sample(lambda x: amp * np.exp(-(x**2) / (2 * sigma**2)))


# p = 3: a unit-mass Gaussian blows up; the sup norm follows (T* - t)^(-1/(p-1))
run = evolve(gaussian(1 / math.sqrt(2 * math.pi), 1.0), EquationParams(p=3.0, alpha=0.5), SolverConfig(t_end=50.0))
fit = run.blowup_fit
print(f"p = 3:   {run.classification}, T* = {run.t_blowup:.5f}, power-law residual {fit.residual:.2%}")

# p = 4.5: both amplitudes blow up, the smaller one much later
for amp in (1.0, 0.5):
    run = evolve(gaussian(amp, 4.0), EquationParams(p=4.5, alpha=0.5), SolverConfig(t_end=50.0))
    print(f"p = 4.5, amplitude {amp}: {run.classification}, T* = {run.t_blowup:.5f}")

# p = 8: small data stay small; t^beta* ||u(t)||_q stays bounded
params = EquationParams(p=8.0, alpha=0.5)
run = evolve(gaussian(0.3, 1.0), params, SolverConfig(t_end=50.0, q=8.5))
track = weighted_norm_track(run, params, 8.5)
print(f"p = 8:   {run.classification} ({run.reason})")
print(f"         sup_t t^{track.beta_star:.4f} ||u||_8.5 = {track.supremum:.4f}, tail non-growing: {track.tail_nongrowing}")
