import numpy as np
import pytest

from riskmono import Dataset
from riskmono.cli import main, parse_centering, parse_gamma_grid, read_config
from riskmono.monotonize import ConfigError
from riskmono.risk_estimation import AVG, Mom


class TestGridParsing:
    def test_log_grid_includes_endpoints(self):
        grid = parse_gamma_grid("0.1:10:20log")
        assert len(grid) == 20
        assert grid[0] == pytest.approx(0.1) and grid[-1] == pytest.approx(10.0)
        ratios = np.diff(np.log(grid))
        assert np.allclose(ratios, ratios[0])

    def test_linear_grid(self):
        grid = parse_gamma_grid("1:3:5lin")
        assert np.allclose(grid, [1, 1.5, 2, 2.5, 3])

    def test_comma_list(self):
        assert parse_gamma_grid("2.0,0.5,1.0") == (0.5, 1.0, 2.0)

    def test_bad_grid_rejected(self):
        with pytest.raises(ConfigError):
            parse_gamma_grid("0:1:5log")

    def test_centering(self):
        assert parse_centering("avg") == AVG
        assert parse_centering("mom:0.1") == Mom(0.1)
        with pytest.raises(ConfigError):
            parse_centering("median")


class TestProfileCommand:
    def test_row_count(self, capsys):
        rc = main(
            ["profile", "--kind", "mn2ls", "--rho2", "4", "--sigma2", "1",
             "--gamma", "0.1:10:20log"]
        )
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0] == "gamma,analytic,monotonized"
        assert len(out) == 21

    def test_onestep_kind(self, capsys):
        rc = main(["profile", "--kind", "onestep", "--rho2", "4", "--gamma", "1.2,2"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        risks = [float(line.split(",")[1]) for line in lines[1:]]
        assert all(1.0 < r < 4.0 for r in risks)


class TestSimulateCommand:
    CONFIG = """
# tiny smoke sweep
n = 40
gammas = 0.5,1.6
reps = 2
model = dense
rho2 = 4        # signal energy
sigma2 = 1
proc = zero
base = mn2
m = 1
n_te = 8
block = 6
seed = 3
"""

    def test_deterministic_output(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(self.CONFIG)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        header = out1.read_text().splitlines()[0]
        assert header.startswith("gamma,p,proc,M,mean_risk")

    def test_missing_key_is_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("n = 40\n")
        assert main(["simulate", "--config", str(cfg), "--out", "x.csv"]) == 1

    def test_config_reader(self, tmp_path):
        cfg = tmp_path / "kv.cfg"
        cfg.write_text("a = 1\n# comment line\nb = two words  # trailing\n")
        assert read_config(cfg) == {"a": "1", "b": "two words"}


class TestMonotonizeCommand:
    def test_prints_table_and_selection(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((60, 5))
        beta = np.array([1.0, -1.0, 0.5, 0.0, 2.0])
        data = Dataset(X, X @ beta + 0.1 * rng.standard_normal(60))
        path = tmp_path / "d.csv"
        data.to_csv(path)
        rc = main(
            ["monotonize", "--data", str(path), "--proc", "zero", "--base", "mn2",
             "--M", "2", "--nte", "12", "--block", "8", "--seed", "1"]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert out.count("selected") >= 2  # one marked row + summary line
        assert "# coefficients:" in out

    def test_missing_data_file(self, capsys):
        rc = main(
            ["monotonize", "--data", "/nonexistent.csv", "--proc", "zero",
             "--base", "mn2"]
        )
        assert rc == 1


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["profile", "--bogus"]) == 1

    def test_unknown_command(self):
        assert main(["transmogrify"]) == 1

    def test_selftest_passes(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out and "[FAIL]" not in out
