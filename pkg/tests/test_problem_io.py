import json

import numpy as np
import pytest

from powergp.problem_io import (
    ProblemFormatError,
    config_from_dict,
    config_to_dict,
    load_config,
    load_example1,
    load_problem,
    problem_from_dict,
    read_csv,
    save_config,
    save_problem,
    write_csv,
)
from powergp.scenario import NetworkConfig, PathLossModel


def valid_dict():
    return {
        "G": [[0.5, 0.1], [0.2, 0.4]],
        "n_watts": [1e-7, 1e-7],
        "w": [0.5, 0.5],
        "p_min_watts": [1e-9, 1e-9],
        "p_max_watts": [1e-3, 1e-3],
        "gamma_min": [0.0, 0.0],
        "rate_a": 1.0,
        "rate_b": 1.0,
    }


class TestProblemFiles:
    def test_round_trip(self, tmp_path):
        prob = problem_from_dict(valid_dict())
        path = tmp_path / "prob.json"
        save_problem(prob, path)
        again = load_problem(path)
        assert again.gains.tolist() == prob.gains.tolist()
        assert again.noise_w.tolist() == prob.noise_w.tolist()
        assert again.weights.tolist() == prob.weights.tolist()

    def test_negative_gain_names_the_entry(self):
        data = valid_dict()
        data["G"][1][0] = -0.2
        with pytest.raises(ProblemFormatError, match=r"G\[1\]\[0\]"):
            problem_from_dict(data)

    def test_missing_field_named(self):
        data = valid_dict()
        del data["n_watts"]
        with pytest.raises(ProblemFormatError, match="n_watts"):
            problem_from_dict(data)

    def test_length_mismatch_named(self):
        data = valid_dict()
        data["w"] = [1.0]
        with pytest.raises(ProblemFormatError, match="'w'"):
            problem_from_dict(data)

    def test_rate_floors_converted(self):
        data = valid_dict()
        del data["gamma_min"]
        data["r_min"] = [1.0, 0.0]
        data["rate_a"] = 0.5
        data["rate_b"] = 0.5
        prob = problem_from_dict(data)
        # gamma = (2^(r/a) - 1)/b
        assert prob.gamma_min[0] == pytest.approx((2.0 ** 2 - 1) / 0.5)
        assert prob.gamma_min[1] == pytest.approx(0.0)

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json at all{{")
        with pytest.raises(ProblemFormatError, match="JSON"):
            load_problem(path)

    def test_example1_fixture(self):
        prob = load_example1()
        assert prob.n_links == 4
        assert prob.gains[0, 0] == pytest.approx(0.4310)
        assert prob.p_max_w.tolist() == [0.0007, 0.0008, 0.0009, 0.001]
        assert prob.weights == pytest.approx([1 / 6, 1 / 6, 1 / 3, 1 / 3])
        assert prob.noise_w == pytest.approx([1e-7] * 4)


class TestConfigFiles:
    def test_round_trip(self, tmp_path):
        cfg = NetworkConfig(bandwidth_hz=10e6,
                            pathloss=PathLossModel(exponent=2.4))
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        again = load_config(path)
        assert again == cfg

    def test_defaults_applied_for_missing_fields(self):
        cfg = config_from_dict({"bandwidth_hz": 5e6})
        assert cfg.bandwidth_hz == 5e6
        assert cfg.site_rows == 4
        assert cfg.bs_spacing_m == 2000.0

    def test_unknown_field_rejected(self):
        with pytest.raises(ProblemFormatError, match="mystery"):
            config_from_dict({"mystery": 1})

    def test_table_defaults(self):
        cfg = NetworkConfig()
        assert cfg.cell_count == 48
        assert cfg.bs_spacing_m == 2000.0
        assert cfg.bs_height_m == 35.0
        assert (cfg.hpbw_azimuth_deg, cfg.hpbw_elevation_deg) == (120.0, 13.0)
        assert cfg.downtilt_deg == 8.5
        assert cfg.uav_height_m == 60.0
        assert cfg.max_tx_power_dbm == 23.0
        assert cfg.temperature_k == 290.0


class TestCsv:
    def test_round_trip_numeric(self, tmp_path):
        path = tmp_path / "out.csv"
        rows = [[0, 0.1234567890123456789, "label"], [1, 2.5e-13, "x"]]
        write_csv(path, "unit-test", ["idx", "value", "tag"], rows)
        schema, header, back = read_csv(path)
        assert schema == "unit-test"
        assert header == ["idx", "value", "tag"]
        assert float(back[0][1]) == rows[0][1]
        assert float(back[1][1]) == rows[1][1]

    def test_version_comment_first_line(self, tmp_path):
        path = tmp_path / "out.csv"
        write_csv(path, "unit-test", ["a"], [[1]])
        first = path.read_text().splitlines()[0]
        assert first.startswith("# powergp-csv v1")
        assert "schema=unit-test" in first
