"""Radial kernels, cell regularization and table kernels."""

import math

import numpy as np
import pytest
from scipy import integrate

from fujita_lab.errors import KernelError, ParameterError
from fujita_lab.grid import Grid
from fujita_lab.kernels import ConvolutionKernel, load_kernel_table, offset_radius, riesz_constant
from fujita_lab.operators import kernel_convolve

from conftest import gaussian


def direct_convolution_2d(grid, K, f):
    """O(N^4) oracle for small 2-D grids."""
    N, h = grid.N, grid.h
    samples = K.samples(grid)
    out = np.zeros(grid.shape)
    for i in range(N):
        for j in range(N):
            for a in range(N):
                for b in range(N):
                    out[i, j] += samples[(i - a) % N, (j - b) % N] * f[a, b]
    return out * h * h


class TestProfiles:
    def test_riesz_origin_average_matches_quadrature(self):
        for n, alpha in ((1, 0.4), (2, 1.3)):
            K = ConvolutionKernel.riesz(alpha, n)
            rho = 0.3
            closed = K.ball_average(rho)
            numeric = ConvolutionKernel(K.profile, n=n).ball_average(rho)
            assert closed == pytest.approx(numeric, rel=1e-6)

    def test_riesz_constant_2d(self):
        # A = Gamma(1 - a/2) / (Gamma(a/2) pi 2^a)
        a = 1.0
        assert riesz_constant(2, a) == pytest.approx(math.gamma(0.5) / (math.gamma(0.5) * math.pi * 2), rel=1e-14)
        with pytest.raises(ParameterError):
            riesz_constant(1, 1.2)

    def test_log_profile(self):
        K = ConvolutionKernel.exponential(1, 2.0)
        r = np.array([0.5, 3.0])
        assert np.allclose(K.log(r), -r / 2)

    def test_constant_must_be_positive(self):
        with pytest.raises(KernelError):
            ConvolutionKernel.constant(0.0)


class TestSampling:
    def test_offset_radius_is_periodic_distance(self):
        g = Grid(1, 8.0, 8)
        assert list(offset_radius(g)) == [0, 1, 2, 3, 4, 3, 2, 1]

    def test_symbol_of_constant_is_box_volume_at_zero(self):
        g = Grid(2, 4.0, 16)
        sym = ConvolutionKernel.constant(2.0, 2).symbol(g)
        assert sym[0, 0] == pytest.approx(2.0 * 16.0)
        assert np.abs(sym.ravel()[1:]).max() < 1e-12

    def test_dirac_is_identity(self, grid1):
        f = gaussian(grid1)
        out = kernel_convolve(f, ConvolutionKernel.dirac(1)).values
        assert np.abs(out - f.values).max() < 1e-13

    def test_constant_kernel_gives_total_mass(self, grid1):
        f = gaussian(grid1)
        out = kernel_convolve(f, ConvolutionKernel.constant(1.0)).values
        assert np.allclose(out, f.integral(), rtol=1e-12)

    def test_exponential_matches_direct_sum_2d(self):
        g = Grid(2, 4.0, 8)
        K = ConvolutionKernel.exponential(2)
        f = gaussian(g, sigma=0.7)
        assert np.abs(kernel_convolve(f, K).values - direct_convolution_2d(g, K, f.values)).max() < 1e-12

    def test_exponential_approximates_continuum(self):
        # e^{-|x|} * e^{-x^2/2} at x = 0: int e^{-|y| - y^2/2} dy
        g = Grid(1, 60.0, 4096)
        f = gaussian(g)
        exact, _ = integrate.quad(lambda y: 2 * math.exp(-y - y * y / 2), 0, np.inf)
        out = kernel_convolve(f, ConvolutionKernel.exponential(1)).values
        assert out[g.N // 2] == pytest.approx(exact, rel=1e-4)


class TestCheck:
    def test_accepts_decreasing_kernels(self, grid1):
        ConvolutionKernel.exponential(1).check(grid1)
        ConvolutionKernel.riesz(0.5).check(grid1)
        kernel_convolve(gaussian(grid1), ConvolutionKernel.exponential(1), validate=True)

    def test_rejects_increasing_tail(self, grid1):
        K = ConvolutionKernel(lambda r: r**2 * np.exp(-r) + 1e-3, n=1, monotone_tail_radius=0.5, name="hump")
        with pytest.raises(KernelError, match="hump"):
            K.check(grid1)

    def test_rejects_dimension_mismatch(self, grid2):
        with pytest.raises(KernelError):
            ConvolutionKernel.exponential(1).check(grid2)


class TestTable:
    def test_roundtrip_and_loglog_extrapolation(self, tmp_path):
        r = np.geomspace(0.1, 10, 30)
        path = tmp_path / "k.txt"
        np.savetxt(path, np.column_stack([r, r**-0.5]), header="radius value")
        K = load_kernel_table(path)
        assert np.allclose(K(r), r**-0.5, rtol=1e-12)
        # power laws are exact under log-log extrapolation
        assert K(np.array([100.0]))[0] == pytest.approx(0.1, rel=1e-12)
        assert K(np.array([0.01]))[0] == pytest.approx(10.0, rel=1e-12)

    @pytest.mark.parametrize(
        "rows", [np.array([[1.0, 1.0, 1.0]]), np.array([[1.0, -1.0], [2.0, 1.0]]), np.array([[1.0, 1.0]])]
    )
    def test_rejects_bad_tables(self, tmp_path, rows):
        path = tmp_path / "bad.txt"
        np.savetxt(path, rows)
        with pytest.raises(KernelError):
            load_kernel_table(path)
