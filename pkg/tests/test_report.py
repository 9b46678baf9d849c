import csv
import os

import numpy as np
import pytest

from fxtrack import parse_scenario, run_scenario, validate_scenario, validation_lines, write_outputs
from fxtrack.report import CSV_COLUMNS, report_lines

from conftest import SMC_SCENARIO, UNDIRECTED_SCENARIO


@pytest.fixture(scope="module")
def smc_result():
    return run_scenario(parse_scenario(SMC_SCENARIO))


@pytest.fixture(scope="module")
def pair_result():
    return run_scenario(parse_scenario(UNDIRECTED_SCENARIO.format(c2=3.0)))


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class TestTrajectoryCsv:
    def test_layout(self, smc_result, tmp_path):
        paths = write_outputs(smc_result, str(tmp_path))
        rows = read_rows(paths["csv"])
        assert rows[0] == CSV_COLUMNS
        assert len(rows) - 1 == len(smc_result.log)
        assert rows[1][:2] == ["0", "1"]
        assert float(rows[1][2]) == 1.0

    def test_full_precision(self, smc_result, tmp_path):
        rows = read_rows(write_outputs(smc_result, str(tmp_path))["csv"])
        x = smc_result.log.channel("x")[:, 0]
        np.testing.assert_array_equal([float(r[2]) for r in rows[1:]], x)

    def test_smc_observer_column_is_position_lyapunov(self, smc_result, tmp_path):
        rows = read_rows(write_outputs(smc_result, str(tmp_path))["csv"])
        for row in rows[1:]:
            assert float(row[CSV_COLUMNS.index("V_obs")]) == pytest.approx(0.5 * float(row[2]) ** 2)

    def test_one_row_per_agent(self, pair_result, tmp_path):
        rows = read_rows(write_outputs(pair_result, str(tmp_path))["csv"])
        assert len(rows) - 1 == 2 * len(pair_result.log)
        assert [r[1] for r in rows[1:3]] == ["1", "2"]
        # network-wide value repeated on both agent rows
        assert rows[1][-1] == rows[2][-1]


class TestReport:
    def test_smc_sections(self, smc_result):
        text = "\n".join(report_lines(smc_result))
        assert "Surface arrival" in text
        assert "sqrt(2 V1)" in text
        assert "RESULT: CONVERGED" in text

    def test_network_sections(self, pair_result):
        text = "\n".join(report_lines(pair_result))
        assert "Observer" in text
        assert "lambda1_Q" in text
        assert "minimal admissible gains" in text
        assert "settling time" in text

    def test_validation_lines_list_minimal_rho(self):
        sc = parse_scenario(UNDIRECTED_SCENARIO.format(c2=3.0))
        lines = validation_lines(sc, validate_scenario(sc))
        assert any("rho=3" in line for line in lines)
        assert lines[-1] == "Verdict: all conditions hold"

    def test_files_named_after_scenario(self, smc_result, tmp_path):
        paths = write_outputs(smc_result, str(tmp_path / "new"))
        assert os.path.basename(paths["csv"]) == "short-smc.csv"
        assert os.path.basename(paths["report"]) == "short-smc_report.txt"


class TestDisconnectedForcedRun:
    @pytest.fixture(scope="class")
    def split_result(self):
        text = UNDIRECTED_SCENARIO.format(c2=3.0).replace("edges: [[1, 2]]", "edges: []")
        return run_scenario(parse_scenario(text))

    def test_validation_recorded(self, split_result):
        assert not split_result.validation.is_valid

    def test_observer_lyapunov_written_as_nan(self, split_result, tmp_path):
        assert np.isnan(split_result.log.channel("V_obs")).all()
        rows = read_rows(write_outputs(split_result, str(tmp_path))["csv"])
        assert rows[1][CSV_COLUMNS.index("V_obs")] == "nan"

    def test_only_surface_check_remains(self, split_result):
        assert [check.kind.value for check in split_result.lyapunov] == ["V1"]
        with pytest.raises(KeyError):
            split_result.lyapunov_check("V3")

    def test_report_explains_skip(self, split_result):
        text = "\n".join(report_lines(split_result))
        assert "Notes" in text
        assert "observer Lyapunov diagnostics skipped" in text
        assert "V_obs written as NaN" in text
