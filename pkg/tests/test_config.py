"""Configuration parsing and validation."""

import numpy as np
import pytest

from fujita_lab.config import ExperimentConfig, initial_field, load_config, parse_config
from fujita_lab.errors import ConfigError

BASE = """version = 1
seed = 7

[equation]
n = 1
alpha = 0.5
p = 3
"""


class TestParse:
    def test_defaults(self):
        cfg = parse_config(BASE)
        assert isinstance(cfg, ExperimentConfig)
        assert cfg.seed == 7 and cfg.n == 1
        assert cfg.p_values == (3.0,) or list(cfg.p_values) == [3.0]
        assert not cfg.is_sweep
        p = cfg.params()
        assert (p.p, p.alpha, p.beta, p.nonlinearity) == (3.0, 0.5, 2.0, "riesz")

    def test_sweep_cells(self):
        cfg = parse_config("[equation]\np_grid = [2, 3]\nalpha_grid = [0.3, 0.5]\n[initial]\namplitude_grid = [0.1, 0.2]\n")
        assert cfg.is_sweep
        assert len(cfg.cells()) == 8
        assert cfg.cells()[0] == (0.3, 2.0, 0.1)

    @pytest.mark.parametrize(
        "text, field, line",
        [
            ("version = 1\n\n[equation]\nn = 1\nalpha = 3\n", "equation.alpha", 5),
            ("version = 1\n[equation]\nn = 3\n", "equation.n", 3),
            ("version = 2\n", "version", 1),
            ("seed = -1\n", "seed", 1),
            ("[equation]\np = 1.0\n", "equation.p", 2),
            ("[equation]\nbeta = 2.5\n", "equation.beta", 2),
            ("[equation]\nwidget = 1\n", "equation.widget", 2),
            ("[engine]\nx = 1\n", "engine", 1),
            ("[grid]\npoints = 100.5\n", "grid.points", 2),
            ("[grid]\npoints = 7\n", "grid.points", 2),
            ("[equation]\np = true\n", "equation.p", 2),
            ("[initial]\nfamily = \"square\"\n", "initial.family", 2),
            ("[equation]\nnonlinearity = \"kernel\"\n", "equation.kernel", None),
            ("[solver]\nt_end = -1.0\n", "solver.t_end", 2),
        ],
    )
    def test_errors_carry_field_and_line(self, text, field, line):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.field == field
        if line is not None:
            assert info.value.line == line
            assert f"line {line}" in str(info.value)

    def test_alpha_message(self):
        with pytest.raises(ConfigError, match="0 < alpha < n = 1, got 3"):
            parse_config("[equation]\nalpha = 3\n")

    def test_syntax_error_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config("version = 1\n[equation\n")
        assert info.value.line == 2

    def test_mass_and_amplitude_exclusive(self):
        with pytest.raises(ConfigError):
            parse_config("[initial]\nmass = 1.0\namplitude = 2.0\n")

    def test_hash_is_canonical(self):
        a = parse_config(BASE)
        b = parse_config(BASE.replace("p = 3", "p = 3.0") + "\n# comment\n")
        assert a.content_hash() == b.content_hash()
        assert a.with_seed(8).content_hash() != a.content_hash()

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.toml")


class TestInitialData:
    @pytest.mark.parametrize("family", ["gaussian", "bump", "power_decay", "constant", "random"])
    def test_families(self, family):
        cfg = parse_config(BASE + f'[initial]\nfamily = "{family}"\namplitude = 0.4\n')
        u = cfg.initial_field()
        assert u.values.shape == cfg.grid().shape
        assert np.abs(u.values).max() == pytest.approx(0.4)

    def test_mass(self):
        cfg = parse_config(BASE + "[initial]\nmass = 2.5\n")
        assert cfg.initial_field().integral() == pytest.approx(2.5)

    def test_random_seeded(self):
        cfg = parse_config(BASE + '[initial]\nfamily = "random"\n')
        a = cfg.initial_field(seed=1).values
        assert np.array_equal(a, cfg.initial_field(seed=1).values)
        assert not np.array_equal(a, cfg.initial_field(seed=2).values)

    def test_table_text(self, tmp_path):
        x = np.linspace(-20, 20, 4001)
        np.savetxt(tmp_path / "u0.txt", np.column_stack([x, np.exp(-(x**2))]))
        (tmp_path / "c.toml").write_text(BASE + '[grid]\nbox_length = 16.0\npoints = 64\n[initial]\nfamily = "table"\npath = "u0.txt"\n')
        cfg = load_config(tmp_path / "c.toml")
        u = cfg.initial_field()
        g = cfg.grid()
        assert np.allclose(u.values, np.exp(-g.x_axis**2), atol=2e-3)

    def test_table_npy_shape(self, tmp_path):
        np.save(tmp_path / "u0.npy", np.zeros(10))
        (tmp_path / "c.toml").write_text(BASE + '[initial]\nfamily = "table"\npath = "u0.npy"\n')
        with pytest.raises(ConfigError, match="shape"):
            load_config(tmp_path / "c.toml").initial_field()

    def test_kernel_table(self, tmp_path):
        r = np.geomspace(1e-3, 1e4, 200)
        np.savetxt(tmp_path / "k.txt", np.column_stack([r, np.exp(-r / 50) / (1 + r)]))
        (tmp_path / "c.toml").write_text(
            '[equation]\nnonlinearity = "kernel"\nkernel_table = "k.txt"\np = 3\n'
        )
        params = load_config(tmp_path / "c.toml").params()
        assert params.kernel(1.0) == pytest.approx(np.exp(-1 / 50) / 2, rel=1e-3)

    def test_direct_helper(self):
        cfg = parse_config(BASE)
        u = initial_field(cfg.initial, cfg.grid())
        assert u.values.max() == pytest.approx(1.0)
