"""Cutoffs, test-function integrals, the inequality audit and kernel conditions."""

import math

import numpy as np
import pytest
from scipy import integrate

from fujita_lab.capacity import (
    CAPACITY_CSV_COLUMNS,
    Trajectory,
    build_test_function,
    capacity_integrals,
    cutoff_derivative,
    cutoff_profile,
    fit_power_law,
    kernel_limit_conditions,
    mass_functional,
    predicted_exponents,
    reports_to_csv,
    test_function_scaling as scaling_fits,
    verify_capacity_inequality,
)
from fujita_lab.dynamics import SolverConfig, evolve
from fujita_lab.equation import EquationParams
from fujita_lab.errors import NeedsDenserTrajectoryError, ParameterError, RegressionError
from fujita_lab.grid import Grid
from fujita_lab.kernels import ConvolutionKernel

from conftest import gaussian


class TestCutoff:
    def test_plateaus(self):
        r = np.linspace(0, 2, 401)
        phi = cutoff_profile(r)
        assert np.all(phi[r <= 0.5] == 1.0)
        assert np.all(phi[r >= 1.0] == 0.0)
        assert np.all(np.diff(phi) <= 0)

    def test_derivative_matches_differences(self):
        r = np.linspace(0.52, 0.98, 47)
        h = 1e-6
        fd = (cutoff_profile(r + h) - cutoff_profile(r - h)) / (2 * h)
        assert np.allclose(cutoff_derivative(r), fd, rtol=1e-6, atol=1e-9)

    def test_smooth_at_junctions(self):
        assert abs(cutoff_derivative(0.5 + 1e-3)) < 1e-100
        assert abs(cutoff_derivative(1.0 - 1e-3)) < 1e-100


class TestTestFunction:
    grid = Grid(1, 256.0, 2048)

    def test_rejects(self):
        with pytest.raises(ParameterError):
            build_test_function(1.0, 8.0, 1.0, self.grid, 2.0)
        with pytest.raises(ParameterError):
            build_test_function(3.0, 8.0, 0.0, self.grid, 2.0)
        with pytest.raises(ParameterError):
            build_test_function(3.0, 0.2, 1.0, self.grid, 2.0)
        with pytest.raises(ParameterError):
            build_test_function(3.0, 100.0, 1.0, self.grid, 2.0)

    def test_J2_against_quadrature(self):
        p, R, T = 3.0, 8.0, 2.0
        tf = build_test_function(p, R, T, self.grid, 2.0)
        ell, pc = tf.ell, p / (p - 1)
        space, _ = integrate.quad(lambda x: cutoff_profile(abs(x) / R) ** ell, -R, R, points=[-R / 2, R / 2])
        time, _ = integrate.quad(
            lambda t: cutoff_profile(t / T) * abs(cutoff_derivative(t / T) / T) ** pc, T / 2, T, limit=200
        )
        expected = ell * space ** ((p - 1) / p) * time ** ((p - 1) / p)
        assert tf.J2() == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize("p", [2.0, 3.0, 5.0])
    def test_scaling_exponents(self, p):
        fits = scaling_fits(p, 2.0, self.grid, [8.0, 16.0, 32.0, 64.0], [0.5, 1.0, 2.0, 4.0], 16.0, 1.0)
        pred = predicted_exponents(p, 1, 2.0)
        for key, fit in fits.items():
            assert fit.exponent == pytest.approx(pred[key], abs=2e-3), key

    def test_ju_nonnegative(self):
        tf = build_test_function(3.0, 16.0, 1.0, self.grid, 1.0)
        assert tf.ju_min() > -1e-8


class TestTrajectory:
    def test_needs_snapshots(self, grid1):
        res = evolve(gaussian(grid1, amp=0.1), EquationParams(), SolverConfig(t_end=0.1))
        with pytest.raises(NeedsDenserTrajectoryError):
            Trajectory.from_run(res)

    def test_cadence(self):
        g = Grid(1, 8.0, 32)
        traj = Trajectory(g, np.linspace(0, 1, 9), np.zeros((9, 32)))
        traj.window(0.25, min_intervals=2)
        with pytest.raises(NeedsDenserTrajectoryError, match="cadence"):
            traj.window(1.0, min_intervals=32)
        with pytest.raises(NeedsDenserTrajectoryError, match="ends"):
            traj.window(2.0, min_intervals=4)

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            Trajectory(Grid(1, 8.0, 32), np.arange(3.0), np.zeros((2, 32)))


class TestCapacityIntegrals:
    grid = Grid(1, 64.0, 512)
    params = EquationParams(p=3.0, alpha=0.5)

    def test_zero_trajectory_is_vacuous(self):
        traj = Trajectory(self.grid, np.linspace(0, 1, 65), np.zeros((65, 512)))
        reports = [
            capacity_integrals(traj, build_test_function(3.0, T**0.5, T, self.grid, 2.0), self.params)
            for T in (0.5, 0.75, 1.0)
        ]
        v = verify_capacity_inequality(reports, self.params)
        assert v.vacuous and v.inequality_holds

    def test_identity_and_inequality_on_a_run(self):
        res = evolve(
            gaussian(self.grid, amp=0.5),
            self.params,
            SolverConfig(t_end=2.0, snapshot_interval=1 / 64),
        )
        traj = Trajectory.from_run(res, self.grid)
        reports = [
            capacity_integrals(traj, build_test_function(3.0, 4.0 * T**0.5, T, self.grid, 2.0), self.params)
            for T in (0.5, 1.0, 2.0)
        ]
        for r in reports:
            assert r.holds and r.lower_bound_holds
            assert abs(r.identity_residual) < 0.02
            assert r.lhs <= r.rhs * 1.05
        csv_text = reports_to_csv(reports)
        lines = csv_text.splitlines()
        assert tuple(lines[0].split(",")) == CAPACITY_CSV_COLUMNS and len(lines) == 4
        with pytest.raises(ParameterError):
            verify_capacity_inequality(reports, self.params)  # not on R = T^(1/2)

    def test_mismatched_p(self):
        traj = Trajectory(self.grid, np.linspace(0, 1, 65), np.zeros((65, 512)))
        with pytest.raises(ParameterError):
            capacity_integrals(traj, build_test_function(2.0, 4.0, 1.0, self.grid, 2.0), self.params)

    def test_verify_needs_reports(self):
        with pytest.raises(RegressionError):
            verify_capacity_inequality([], self.params)


class TestRegressions:
    def test_fit_power_law(self):
        x = np.geomspace(1, 100, 10)
        fit = fit_power_law(x, 3 * x**-1.5)
        assert fit.exponent == pytest.approx(-1.5) and fit.residual < 1e-12

    def test_fit_needs_samples(self):
        with pytest.raises(RegressionError):
            fit_power_law([1.0, 2.0, 3.0], [1.0, 0.0, -1.0])

    def test_mass_functional(self):
        g = Grid(1, 32.0, 256)
        u = g.sample(lambda x: np.ones_like(x))
        m = mass_functional(u, 0.5, [2.0, 4.0])
        # nodes with |x| <= R: 2R/h + 1 of them
        assert m == pytest.approx([(32 + 1) * g.h / 2**0.5, (64 + 1) * g.h / 2.0])
        with pytest.raises(ParameterError):
            mass_functional(u, 0.5, [20.0])


class TestKernelConditions:
    @pytest.mark.parametrize("p, holds", [(4.0, True), (5.9, True), (6.0, True), (6.1, False), (8.0, False)])
    def test_riesz_flips_at_p_fuj(self, p, holds):
        rep = kernel_limit_conditions(ConvolutionKernel.riesz(0.5), 1, 2.0, p)
        assert (rep.condition_i.verdict == "holds") is holds
        assert "p_fuj = 6" in rep.statement

    def test_condition_iii(self):
        K = ConvolutionKernel.riesz(0.5)
        assert kernel_limit_conditions(K, 1, 2.0, 3.0, gamma=1.0).condition_iii.verdict == "holds"
        assert kernel_limit_conditions(K, 1, 2.0, 4.0, gamma=1.0).condition_iii.verdict == "fails"

    def test_exponential_fails(self):
        rep = kernel_limit_conditions(ConvolutionKernel.exponential(), 1, 2.0, 3.0)
        assert rep.condition_i.verdict == "fails"
        assert rep.condition_i.exponent == -math.inf

    def test_constant_holds(self):
        assert kernel_limit_conditions(ConvolutionKernel.constant(1.0), 1, 2.0, 8.0).condition_i.verdict == "holds"

    def test_radius_span(self):
        with pytest.raises(ParameterError):
            kernel_limit_conditions(ConvolutionKernel.riesz(0.5), 1, 2.0, 3.0, radii=np.geomspace(1, 100, 10))

    def test_report_serializes(self):
        d = kernel_limit_conditions(ConvolutionKernel.riesz(0.5), 1, 2.0, 3.0, gamma=1.0).to_dict()
        assert d["condition_i"]["verdict"] == "holds"
