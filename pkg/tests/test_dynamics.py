"""Adaptive runs, blow-up detection, weighted norms and the scaling family."""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fujita_lab.dynamics import (
    HISTORY_COLUMNS,
    RunResult,
    SolverConfig,
    admissible_q_interval,
    blowup_time_estimate,
    config_from_dict,
    evolve,
    scaling_exponent,
    scaling_transform,
    weighted_norm_track,
)
from fujita_lab.equation import EquationParams
from fujita_lab.errors import ParameterError
from fujita_lab.grid import Grid, lp_norm
from fujita_lab.operators import riesz_zero_mode

from conftest import gaussian


class TestSolverConfig:
    @pytest.mark.parametrize(
        "kw",
        [{"dt_min": 0.1, "dt_max": 0.05}, {"t_end": 0.0}, {"dealias_fraction": 0.0}, {"boundary_zone": 0.5}, {"snapshot_interval": -1.0}],
    )
    def test_rejects(self, kw):
        with pytest.raises(ParameterError):
            SolverConfig(**kw)

    def test_scaled(self):
        c = SolverConfig(t_end=8.0, dt_max=0.4, dt_min=1e-8, snapshot_interval=0.8).scaled(2.0, 2.0)
        assert (c.t_end, c.dt_max, c.dt_min, c.snapshot_interval) == (2.0, 0.1, 2.5e-9, 0.2)

    def test_from_dict_ignores_unknown(self):
        assert config_from_dict({"t_end": 3.0, "colour": "red"}).t_end == 3.0


class TestEvolve:
    def test_zero_data(self, grid1):
        res = evolve(grid1.zeros(), EquationParams(), SolverConfig(t_end=1.0))
        assert res.classification == "global_decay" and res.reason == "zero solution"
        assert np.all(res.history["linf"] == 0)

    def test_linear_decay(self, grid1):
        res = evolve(gaussian(grid1), EquationParams(coupling=0.0), SolverConfig(t_end=2.0))
        assert res.classification == "global_decay"
        assert np.all(np.diff(res.history["linf"]) <= 0)
        assert np.allclose(res.history["mass"], gaussian(grid1).integral(), rtol=1e-12)

    def test_constant_riesz_data_matches_ode(self):
        # u' = m0 u^p, T* = 1 / ((p-1) m0 c^(p-1))
        g = Grid(1, 8.0, 64)
        p, c = 3.0, 0.5
        T_exact = 1 / ((p - 1) * riesz_zero_mode(g, 0.5) * c ** (p - 1))
        res = evolve(g.sample(lambda x: np.full_like(x, c)), EquationParams(p=p, alpha=0.5), SolverConfig(t_end=10 * T_exact))
        assert res.classification == "blowup"
        assert res.t_blowup == pytest.approx(T_exact, rel=0.02)

    def test_local_ode(self):
        g = Grid(1, 8.0, 16)
        res = evolve(g.sample(lambda x: np.ones_like(x)), EquationParams(p=2.0, nonlinearity="local"), SolverConfig(t_end=3.0))
        assert res.classification == "blowup"
        assert res.t_blowup == pytest.approx(1.0, rel=0.02)
        assert res.blowup_fit.residual < 0.01

    def test_threshold_must_exceed_data(self, grid1):
        with pytest.raises(ParameterError):
            evolve(gaussian(grid1, amp=1e8), EquationParams(), SolverConfig())

    def test_boundary_alarm(self):
        g = Grid(1, 16.0, 128)
        u0 = g.sample(lambda x: 0.1 * np.exp(-((x - 6.0) ** 2) / 2))
        res = evolve(u0, EquationParams(coupling=0.0), SolverConfig(t_end=5.0))
        assert res.classification == "inconclusive"
        assert res.reason.startswith("domain truncation")

    def test_snapshots_on_exact_multiples(self, grid1):
        res = evolve(gaussian(grid1, amp=0.1), EquationParams(), SolverConfig(t_end=1.0, snapshot_interval=0.25))
        assert list(res.snapshot_times) == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert res.snapshots.shape == (5, grid1.N)
        assert res.history["t"][-1] == 1.0

    def test_flags_outside_local_theory(self, grid1):
        res = evolve(gaussian(grid1, amp=0.1), EquationParams(p=1.5, alpha=0.5), SolverConfig(t_end=0.1))
        assert "outside local-existence theory" in res.flags

    def test_deterministic(self, grid1):
        a = evolve(gaussian(grid1), EquationParams(), SolverConfig(t_end=1.0))
        b = evolve(gaussian(grid1), EquationParams(), SolverConfig(t_end=1.0))
        assert a.to_json() == b.to_json()

    def test_step_budget(self, grid1):
        res = evolve(gaussian(grid1), EquationParams(), SolverConfig(t_end=1.0, max_steps=3))
        assert res.classification == "inconclusive" and "budget" in res.reason


class TestSerialization:
    def test_json_roundtrip(self, grid1):
        res = evolve(gaussian(grid1, amp=2.0), EquationParams(p=3.0), SolverConfig(t_end=5.0, q=None))
        back = RunResult.from_json(res.to_json())
        assert back.to_json() == res.to_json()
        assert back.classification == res.classification
        assert back.blowup_fit == res.blowup_fit
        for k in res.history:
            assert np.array_equal(back.history[k], res.history[k], equal_nan=True)

    def test_json_has_no_nan_tokens(self, grid1):
        res = evolve(gaussian(grid1, amp=0.1), EquationParams(p=1.5, alpha=0.9), SolverConfig(t_end=0.2))
        text = res.to_json()
        assert "NaN" not in text
        assert json.loads(text)["schema"] == "fujita-lab/run-result"

    def test_rejects_foreign_documents(self):
        with pytest.raises(ParameterError):
            RunResult.from_dict({"schema": "other"})
        with pytest.raises(ParameterError):
            RunResult.from_dict({"schema": "fujita-lab/run-result", "version": 99})

    def test_history_csv(self, grid1):
        res = evolve(gaussian(grid1, amp=0.1), EquationParams(), SolverConfig(t_end=0.2))
        lines = res.history_csv().splitlines()
        assert tuple(lines[0].split(",")) == HISTORY_COLUMNS
        assert len(lines) == len(res.history["t"]) + 1


class TestBlowupFit:
    @given(st.floats(0.5, 20.0), st.floats(1.5, 4.0), st.integers(0, 2**32 - 1))
    def test_noisy_power_law(self, T_star, p, seed):
        # (T* - t) spans 9 decades, so u spans at least 3
        rng = np.random.default_rng(seed)
        k = 1 / (p - 1)
        t = T_star * (1 - np.geomspace(1, 1e-9, 300))
        linf = 2.0 * (T_star - t) ** (-k) * (1 + 0.01 * rng.normal(size=t.size))
        fit = blowup_time_estimate({"t": t, "linf": linf}, p)
        assert not fit.wide_uncertainty
        assert fit.t_star == pytest.approx(T_star, rel=0.01)
        assert fit.residual < 0.05

    def test_exact_power_law(self):
        t = 3.0 - np.geomspace(1.0, 1e-5, 100)
        fit = blowup_time_estimate({"t": t, "linf": (3.0 - t) ** -0.5}, 3.0)
        assert fit.t_star == pytest.approx(3.0, rel=1e-6)
        assert fit.amplitude == pytest.approx(1.0, rel=1e-4)

    def test_too_few_samples(self):
        fit = blowup_time_estimate({"t": [0.0, 1.0, 2.0], "linf": [1.0, 20.0, 400.0]}, 3.0)
        assert fit.wide_uncertainty and fit.t_star == 2.0

    def test_empty(self):
        with pytest.raises(ParameterError):
            blowup_time_estimate({"t": [], "linf": []}, 3.0)


class TestWeightedNorm:
    def test_admissible_interval(self):
        lo, hi = admissible_q_interval(EquationParams(p=8.0, alpha=0.5))
        assert lo == 8.0
        assert hi == pytest.approx(1 / (2 * (2.5 / 14 - 1 / 8)))

    def test_track_from_history_and_snapshots_agree(self):
        g = Grid(1, 64.0, 512)
        params = EquationParams(p=8.0, alpha=0.5)
        res = evolve(gaussian(g, amp=0.3), params, SolverConfig(t_end=4.0, q=8.5, snapshot_interval=0.5))
        a = weighted_norm_track(res, params, 8.5)
        res.q = None
        b = weighted_norm_track(res, params, 8.5, grid=g)
        idx = np.searchsorted(a.times, b.times)
        assert np.allclose(a.values[idx], b.values, rtol=1e-12)
        assert a.beta_star == pytest.approx(1 / (2 * 2.8) - 1 / (2 * 8.5))
        assert math.isfinite(a.supremum)

    def test_rejects_q_outside_interval(self, grid1):
        params = EquationParams(p=8.0, alpha=0.5)
        with pytest.raises(ParameterError, match="admissible"):
            evolve(gaussian(grid1, amp=0.1), params, SolverConfig(t_end=0.1, q=12.0))
        res = evolve(gaussian(grid1, amp=0.1), params, SolverConfig(t_end=0.1))
        with pytest.raises(ParameterError):
            weighted_norm_track(res, params, 8.5)

    def test_empty_interval_for_small_p(self):
        with pytest.raises(ParameterError, match="empty"):
            evolve(gaussian(Grid(1, 8.0, 32), amp=0.1), EquationParams(p=2.0), SolverConfig(q=3.0))


class TestScaling:
    params = EquationParams(p=4.5, alpha=0.5)

    def test_exponent(self):
        assert scaling_exponent(self.params) == pytest.approx(2.5 / 3.5)
        with pytest.raises(ParameterError):
            scaling_exponent(EquationParams(nonlinearity="kernel", kernel=__import__("fujita_lab").ConvolutionKernel.exponential()))

    @pytest.mark.parametrize("lam", [0.5, 2.0, 4.0])
    def test_box_mode_preserves_qsc_norm(self, lam):
        g = Grid(1, 64.0, 512)
        u = gaussian(g, sigma=2.0)
        v = scaling_transform(u, lam, self.params)
        q_sc = 3.5 / 2.5
        assert lp_norm(v, q_sc) == pytest.approx(lp_norm(u, q_sc), rel=1e-12)
        assert v.grid.L == pytest.approx(64.0 / lam)

    def test_same_grid_mode_matches_analytic(self):
        g = Grid(1, 64.0, 512)
        u = gaussian(g, sigma=2.0)
        v = scaling_transform(u, 2.0, self.params, mode="same_grid").values
        factor = 2.0 ** scaling_exponent(self.params)
        # the map wraps periodically, so only the central half is the dilated Gaussian
        mid = np.abs(g.x_axis) < 16
        assert np.allclose(v[mid], factor * np.exp(-((2 * g.x_axis[mid]) ** 2) / 8), atol=1e-14)

    def test_rejects(self, grid1):
        u = gaussian(grid1)
        with pytest.raises(ParameterError):
            scaling_transform(u, 3.0, self.params)
        with pytest.raises(ParameterError):
            scaling_transform(u, 0.5, self.params, mode="same_grid")
        with pytest.raises(ParameterError):
            scaling_transform(u, 2.0, self.params, mode="warp")
