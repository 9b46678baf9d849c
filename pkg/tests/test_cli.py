import os

import pytest

import app
from fxtrack import builtin_scenario, save_scenario
from fxtrack.report import CSV_COLUMNS

from conftest import DIVERGING_SCENARIO


@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / "out")


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestRunExample:
    def test_unknown_id(self, out_dir, capsys):
        assert app.main(["run-example", "7", "--out", out_dir]) == app.EXIT_INVALID
        assert "Unknown example" in capsys.readouterr().err

    def test_export(self, out_dir):
        code = app.main(["run-example", "1", "--out", out_dir, "--dt", "1e-3", "--export"])
        assert code in (app.EXIT_CONVERGED, app.EXIT_NOT_CONVERGED)
        assert os.path.exists(os.path.join(out_dir, "example-1.yaml"))
        assert os.path.exists(os.path.join(out_dir, "example-1.csv"))


class TestRun:
    def test_valid_file(self, smc_file, out_dir):
        assert app.main(["run", smc_file, "--out", out_dir]) == app.EXIT_CONVERGED
        with open(os.path.join(out_dir, "short-smc.csv")) as f:
            assert f.readline().strip() == ",".join(CSV_COLUMNS)
        with open(os.path.join(out_dir, "short-smc_report.txt")) as f:
            assert "RESULT: CONVERGED" in f.read()

    def test_disconnected_topology(self, tmp_path, undirected_text, out_dir, capsys):
        text = undirected_text.format(c2=3.0).replace("edges: [[1, 2]]", "edges: []")
        path = write(tmp_path, "split.yaml", text)
        assert app.main(["run", path, "--out", out_dir]) == app.EXIT_INVALID
        captured = capsys.readouterr()
        assert "undirected and connected" in captured.out + captured.err
        assert not os.path.exists(os.path.join(out_dir, "pair.csv"))

    def test_disconnected_topology_forced(self, tmp_path, undirected_text, out_dir):
        text = undirected_text.format(c2=3.0).replace("edges: [[1, 2]]", "edges: []")
        path = write(tmp_path, "split.yaml", text)
        code = app.main(["run", path, "--out", out_dir, "--force"])
        assert code in (app.EXIT_CONVERGED, app.EXIT_NOT_CONVERGED)
        assert os.path.exists(os.path.join(out_dir, "pair.csv"))
        with open(os.path.join(out_dir, "pair_report.txt")) as f:
            report = f.read()
        assert "observer Lyapunov diagnostics skipped" in report
        assert "undirected and connected" in report

    def test_under_gained_refused(self, tmp_path, undirected_text, out_dir):
        path = write(tmp_path, "weak.yaml", undirected_text.format(c2=1.0))
        assert app.main(["run", path, "--out", out_dir]) == app.EXIT_INVALID

    def test_under_gained_forced(self, tmp_path, undirected_text, out_dir):
        path = write(tmp_path, "weak.yaml", undirected_text.format(c2=1.0))
        code = app.main(["run", path, "--out", out_dir, "--force"])
        assert code in (app.EXIT_CONVERGED, app.EXIT_NOT_CONVERGED)
        with open(os.path.join(out_dir, "pair_report.txt")) as f:
            assert "[FAIL] c2 > u_max + d_max" in f.read()

    def test_diverging_run_exits_not_converged(self, tmp_path, out_dir, caplog):
        path = write(tmp_path, "stiff.yaml", DIVERGING_SCENARIO)
        assert app.main(["run", path, "--out", out_dir, "--force"]) == app.EXIT_NOT_CONVERGED
        assert "Non-finite state at t=" in caplog.text

    def test_parse_error_names_line(self, tmp_path, out_dir, capsys):
        path = write(tmp_path, "broken.yaml", (
            "schema_version: 1\nmode: smc\ngains: {rho: oops}\n"
            "timing: {t_a1: 1.0, t_a2: 1.0}\nsim: {horizon: 3.0}\n"
        ))
        assert app.main(["run", path, "--out", out_dir]) == app.EXIT_INVALID
        assert f"{path}:3:" in capsys.readouterr().err

    def test_overrides(self, smc_file, out_dir):
        app.main(["run", smc_file, "--out", out_dir, "--dt", "1e-3", "--seed", "4"])
        with open(os.path.join(out_dir, "short-smc_report.txt")) as f:
            report = f.read()
        assert "dt=0.001" in report
        assert "seed=4" in report

    def test_jobs(self, tmp_path, smc_file, out_dir):
        other = write(tmp_path, "other.yaml", open(smc_file).read().replace("short-smc", "other-smc"))
        assert app.main(["run", smc_file, other, "--out", out_dir, "--jobs", "2"]) == app.EXIT_CONVERGED
        assert os.path.exists(os.path.join(out_dir, "other-smc.csv"))

    def test_invalid_jobs(self, smc_file, out_dir):
        assert app.main(["run", smc_file, "--out", out_dir, "--jobs", "0"]) == app.EXIT_INVALID

    def test_non_numeric_jobs_environment(self, monkeypatch, smc_file, out_dir, capsys):
        monkeypatch.setattr(app.Config, "JOBS", "many")
        assert app.main(["run", smc_file, "--out", out_dir]) == app.EXIT_INVALID
        assert "FXTRACK_JOBS must be an integer" in capsys.readouterr().err


class TestValidate:
    def test_example_2_passes(self, tmp_path, capsys):
        path = save_scenario(builtin_scenario(2), str(tmp_path / "ex2.yaml"))
        assert app.main(["validate", path]) == app.EXIT_CONVERGED
        out = capsys.readouterr().out
        assert "lambda1_Q" in out
        assert "lambda2_L" in out
        assert "[FAIL]" not in out

    def test_b2_below_one(self, tmp_path, undirected_text, capsys):
        text = undirected_text.format(c2=3.0).replace("b2: 1.0", "b2: 0.5")
        path = write(tmp_path, "b2.yaml", text)
        assert app.main(["validate", path]) == app.EXIT_INVALID
        assert "[FAIL] b2 >= 1" in capsys.readouterr().out

    def test_directed_c2_threshold_shown(self, tmp_path, capsys):
        path = save_scenario(builtin_scenario(3), str(tmp_path / "ex3.yaml"))
        assert app.main(["validate", path]) == app.EXIT_INVALID
        out = capsys.readouterr().out
        assert "[FAIL] c2 >= p_max (d_bar + u_max)/lambda1(Q): 34 >=" in out
        assert "p = [4, 3, 2, 1]" in out
        assert "lambda2_L" not in out
