"""Fractional Laplacian, Riesz potentials, p.v. quadrature and Ju's inequality."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fujita_lab.errors import ParameterError
from fujita_lab.grid import Field, Grid, lp_norm
from fujita_lab.kernels import riesz_constant
from fujita_lab.operators import (
    FourierMultiplier,
    RieszKernel,
    frac_laplacian_apply,
    frac_laplacian_pv,
    ju_residual,
    riesz_apply,
    riesz_zero_mode,
)

from conftest import gaussian


def periodic_direct_convolution(grid, kernel_samples_fft_order, f):
    """O(N^2) circular sum h * sum_j K(x_i - x_j) f_j (1-D)."""
    N, h = grid.N, grid.h
    out = np.empty(N)
    for i in range(N):
        out[i] = h * sum(kernel_samples_fft_order[(i - j) % N] * f[j] for j in range(N))
    return out


class TestFractionalLaplacian:
    @given(st.integers(1, 20), st.floats(0.1, 2.0))
    def test_cosine_is_eigenfunction(self, m, beta):
        g = Grid(1, 10.0, 64)
        k = 2 * np.pi * m / g.L
        f = g.sample(lambda x: np.cos(k * x))
        out = frac_laplacian_apply(f, beta).values
        assert np.allclose(out, k**beta * f.values, atol=1e-11 * max(1.0, k**beta))

    def test_beta_two_is_minus_second_derivative(self):
        g = Grid(2, 20.0, 128)
        f = gaussian(g)
        r2 = g.radius**2
        expected = (2 - r2) * f.values  # -Delta e^{-r^2/2} in 2-D
        assert np.abs(frac_laplacian_apply(f, 2.0).values - expected).max() < 1e-10

    def test_semigroup_of_powers(self, grid1):
        f = gaussian(grid1, sigma=2.0)
        a = frac_laplacian_apply(frac_laplacian_apply(f, 0.6), 0.9).values
        b = frac_laplacian_apply(f, 1.5).values
        assert np.abs(a - b).max() < 1e-12

    def test_constants_map_to_zero(self, grid2):
        one = grid2.sample(lambda x, y: np.ones_like(x + y))
        assert np.abs(frac_laplacian_apply(one, 1.3).values).max() < 1e-14

    @pytest.mark.parametrize("beta", [0.0, -1.0, 2.5])
    def test_rejects_order(self, grid1, beta):
        with pytest.raises(ParameterError):
            frac_laplacian_apply(gaussian(grid1), beta)


class TestRiesz:
    @given(st.integers(1, 20), st.floats(0.05, 0.95))
    def test_cosine_is_eigenfunction(self, m, alpha):
        g = Grid(1, 10.0, 64)
        k = 2 * np.pi * m / g.L
        f = g.sample(lambda x: np.cos(k * x))
        out = riesz_apply(f, RieszKernel(alpha)).values
        assert np.allclose(out, k**-alpha * f.values, atol=1e-12)

    def test_constant_1d(self):
        # A = Gamma((1-a)/2) / (Gamma(a/2) sqrt(pi) 2^a); at a = 1/2 this is 1/sqrt(2 pi)
        assert riesz_constant(1, 0.5) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)

    def test_zero_mode_1d_against_quadrature(self):
        g = Grid(1, 12.0, 64)
        A = riesz_constant(1, 0.3)
        val, _ = integrate.quad(lambda x: A * x ** (0.3 - 1), 0, 6.0)
        assert riesz_zero_mode(g, 0.3) == pytest.approx(2 * val, rel=1e-10)

    def test_zero_mode_2d_against_quadrature(self):
        g = Grid(2, 4.0, 16)
        alpha = 0.7
        A = riesz_constant(2, alpha)
        # integrate over the square in polar-free form: 4 * quadrant
        val, _ = integrate.dblquad(lambda y, x: A * (x * x + y * y) ** ((alpha - 2) / 2), 0, 2, 0, 2, epsabs=1e-12)
        assert riesz_zero_mode(g, alpha) == pytest.approx(4 * val, rel=1e-6)

    def test_constant_field_maps_to_zero_mode(self, grid1):
        one = grid1.sample(lambda x: np.ones_like(x))
        out = riesz_apply(one, RieszKernel(0.5)).values
        assert np.allclose(out, riesz_zero_mode(grid1, 0.5), rtol=1e-13)
        assert np.abs(riesz_apply(one, RieszKernel(0.5, zero_mode="zero")).values).max() < 1e-14

    def test_positive_data_positive_potential(self, grid2):
        f = gaussian(grid2, sigma=0.5)
        assert riesz_apply(f, RieszKernel(1.2, 2)).values.min() > 0

    def test_sampled_kernel_is_direct_convolution(self):
        g = Grid(1, 16.0, 64)
        K = RieszKernel(0.5, mode="sampled_kernel")
        f = gaussian(g)
        samples = K.as_convolution_kernel().samples(g)
        direct = periodic_direct_convolution(g, samples, f.values)
        assert np.abs(riesz_apply(f, K).values - direct).max() < 1e-12

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
    def test_multiplier_agrees_with_sampled_kernel(self, alpha):
        # mean-zero difference of Gaussians; the box-truncated kernel differs
        # from the periodic symbol mainly at the lowest modes
        g = Grid(1, 64.0, 1024)
        f = g.sample(lambda x: np.exp(-(x**2) / 2) - 0.5 * np.exp(-(x**2) / 8))
        f = f - f.mean()
        a = riesz_apply(f, RieszKernel(alpha)).values
        b = riesz_apply(f, RieszKernel(alpha, mode="sampled_kernel")).values
        assert np.linalg.norm(a - b) / np.linalg.norm(a) < 0.02

    def test_invalid(self):
        with pytest.raises(ParameterError):
            RieszKernel(1.0, 1)
        with pytest.raises(ParameterError):
            RieszKernel(0.5, mode="fft")
        with pytest.raises(ParameterError):
            riesz_apply(gaussian(Grid(2, 4.0, 16)), RieszKernel(0.5, 1))


class TestMultiplier:
    def test_compose_and_sup(self, grid1):
        sym = np.broadcast_to(grid1.knorm, grid1.shape)
        a = FourierMultiplier(grid1, sym)
        b = FourierMultiplier(grid1, sym)
        ab = a.compose(b)
        f = gaussian(grid1)
        assert np.allclose(ab(f).values, a(b(f)).values, atol=1e-13)
        assert a.sup == pytest.approx(grid1.knorm.max())

    def test_rejects_shape_and_nonfinite(self, grid1):
        with pytest.raises(ParameterError):
            FourierMultiplier(grid1, np.ones(3))
        sym = np.ones(grid1.shape)
        sym[3] = np.inf
        with pytest.raises(ParameterError):
            FourierMultiplier(grid1, sym)


class TestPrincipalValue:
    def test_closed_form_half_laplacian(self):
        # (-Delta)^(1/2) (1 + x^2)^-1 = (1 - x^2) / (1 + x^2)^2
        x = np.linspace(-3, 3, 13)
        res = frac_laplacian_pv(lambda y: 1 / (1 + y**2), 0.5, x, h=1e-2, outer=2000.0)
        exact = (1 - x**2) / (1 + x**2) ** 2
        assert np.abs(res.value - exact).max() < 1e-3

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_matches_multiplier_on_periodic_gaussian(self, s):
        g = Grid(1, 40.0, 512)
        idx = np.arange(g.N // 2 - 32, g.N // 2 + 33, 8)
        x = g.x_axis[idx]
        # the multiplier acts on the periodic extension, so the oracle must see it too
        def periodic(y):
            y = (np.asarray(y) + g.L / 2) % g.L - g.L / 2
            return np.exp(-(y**2))

        f = g.sample(periodic)
        res = frac_laplacian_pv(periodic, s, x, outer=400.0, far_mean=f.mean())
        spectral = frac_laplacian_apply(f, 2 * s).values
        assert np.abs(res.value - spectral[idx]).max() < 1e-4

    def test_truncation_warning(self):
        res = frac_laplacian_pv(lambda y: 1 / (1 + y**2), 0.5, 0.0, outer=5.0)
        assert res.truncation_warning


class TestJu:
    def test_analytic_at_beta_two(self):
        # ell phi^(ell-1) (-phi'') + (phi^ell)'' = ell (ell-1) phi^(ell-2) phi'^2
        g = Grid(1, 40.0, 2048)
        ell = 3.0
        x = g.x_axis
        phi = np.exp(-(x**2) / 2)
        res = ju_residual(Field(g, phi), ell, 2.0).values
        exact = ell * (ell - 1) * phi ** (ell - 2) * (x * phi) ** 2
        assert np.abs(res - exact).max() < 1e-10

    @pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
    def test_nonnegative_for_smooth_data(self, beta):
        g = Grid(1, 64.0, 1024)
        phi = gaussian(g, sigma=3.0)
        res = ju_residual(phi, 2.5, beta).values
        scale = lp_norm(frac_laplacian_apply(phi, beta), np.inf)
        assert res.min() >= -1e-8 * scale

    def test_rejects_exponent(self, grid1):
        with pytest.raises(ParameterError):
            ju_residual(gaussian(grid1), 1.0, 1.0)
