import json
import sys

import numpy as np
import pytest

from powergp.cli import main
from powergp.problem_io import (
    load_example1,
    load_problem,
    read_csv,
    save_problem,
)


@pytest.fixture()
def example1_file(tmp_path):
    path = tmp_path / "example1.json"
    save_problem(load_example1(), path)
    return path


class TestSolveCommand:
    def test_solve_example1(self, example1_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["solve", str(example1_file), "--out", str(out)])
        assert code == 0
        schema, header, rows = read_csv(out / "trajectory.csv")
        assert schema == "sca-trajectory"
        assert header == ["iteration", "delta_p_norm_w", "weighted_sum_rate_bit_s_hz"]
        wsr = [float(r[2]) for r in rows]
        assert np.all(np.diff(wsr) >= -1e-9)
        schema, header, rows = read_csv(out / "allocation.csv")
        assert schema == "sca-allocation"
        assert len(rows) == 4
        assert "p_dbm" in header

    def test_malformed_file_is_an_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        raw = {
            "G": [[-0.1]], "n_watts": [1e-7], "w": [1.0],
            "p_min_watts": [1e-9], "p_max_watts": [1e-3], "gamma_min": [0.0],
        }
        bad.write_text(json.dumps(raw))
        code = main(["solve", str(bad), "--out", str(tmp_path / "o")])
        assert code == 1
        err = capsys.readouterr().err
        assert "G[0][0]" in err

    def test_infeasible_exits_2(self, tmp_path, capsys):
        raw = {
            "G": [[1.0, 1.0], [1.0, 1.0]], "n_watts": [1e-7, 1e-7],
            "w": [1.0, 1.0], "p_min_watts": [1e-9, 1e-9],
            "p_max_watts": [1e-3, 1e-3], "gamma_min": [10.0, 10.0],
        }
        path = tmp_path / "infeasible.json"
        path.write_text(json.dumps(raw))
        code = main(["solve", str(path), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "infeasible" in capsys.readouterr().err.lower()

    def test_unknown_argument_is_an_error(self, capsys):
        assert main(["solve"]) == 1


class TestCase1Command:
    def test_small_batch(self, tmp_path, capsys):
        out = tmp_path / "c1"
        code = main(["case1", "--inits", "3", "--seed", "0",
                     "--points-per-dim", "16", "--out", str(out)])
        assert code == 0
        schema, header, rows = read_csv(out / "case1_runs.csv")
        assert schema == "case1-runs"
        assert len(rows) == 3
        _, _, srows = read_csv(out / "case1_summary.csv")
        assert len(srows) == 1

    def test_deterministic_given_seed(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["case1", "--inits", "2", "--seed", "7", "--points-per-dim", "8",
              "--out", str(out1)])
        main(["case1", "--inits", "2", "--seed", "7", "--points-per-dim", "8",
              "--out", str(out2)])
        assert (out1 / "case1_runs.csv").read_text() == \
            (out2 / "case1_runs.csv").read_text()


class TestScenarioCommand:
    def test_export_writes_problem(self, tmp_path, capsys):
        out = tmp_path / "sc"
        code = main(["scenario", "export", "--seed", "0", "--out", str(out)])
        assert code == 0
        prob = load_problem(out / "scenario_seed0_problem.json")
        assert prob.n_links == 48
        _, _, rows = read_csv(out / "scenario_seed0_positions.csv")
        assert len(rows) == 48
        cfg = json.loads((out / "scenario_seed0_config.json").read_text())
        assert cfg["bs_spacing_m"] == 2000.0

    def test_export_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["scenario", "export", "--seed", "3", "--out", str(out1)])
        main(["scenario", "export", "--seed", "3", "--out", str(out2)])
        assert (out1 / "scenario_seed3_problem.json").read_text() == \
            (out2 / "scenario_seed3_problem.json").read_text()


class TestOracleCommand:
    def test_grid_oracle(self, example1_file, tmp_path, capsys):
        out = tmp_path / "or"
        code = main(["oracle", str(example1_file), "--method", "grid",
                     "--points", "16", "--out", str(out)])
        assert code == 0
        _, header, rows = read_csv(out / "oracle.csv")
        assert rows[0][0] == "grid:16^4"

    def test_vertex_oracle(self, example1_file, tmp_path, capsys):
        out = tmp_path / "or"
        code = main(["oracle", str(example1_file), "--method", "vertex",
                     "--out", str(out)])
        assert code == 0
        _, _, rows = read_csv(out / "oracle.csv")
        assert rows[0][0] == "vertices:2^4"
