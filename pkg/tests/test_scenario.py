import json
from pathlib import Path

import numpy as np
import pytest

from powergp.scenario import (
    NetworkConfig,
    PathLossModel,
    antenna_gain,
    build_hex_network,
    coupling_gain_db,
    dbm_to_watts,
    free_space_intercept_db,
    gain_matrix,
    olpc_power,
    path_loss,
    place_uavs,
    thermal_noise,
    watts_to_dbm,
)

FIXTURE = Path(__file__).parent / "fixtures" / "case2_seed0.json"


@pytest.fixture(scope="module")
def default_scenario():
    return build_hex_network(NetworkConfig())


@pytest.fixture(scope="module")
def seed0(default_scenario):
    return place_uavs(default_scenario, [0, 0])


class TestLayout:
    def test_default_grid_is_48_cells(self, default_scenario):
        assert default_scenario.sites.shape == (16, 2)
        assert default_scenario.cell_count == 48

    def test_nearest_site_distance_equals_spacing(self, default_scenario):
        sites = default_scenario.sites
        d = np.linalg.norm(sites[None, :, :] - sites[:, None, :], axis=2)
        d[d == 0] = np.inf
        assert d.min() == pytest.approx(2000.0, rel=1e-12)

    def test_single_site_grid(self):
        scn = build_hex_network(NetworkConfig(site_rows=1, site_cols=1))
        assert scn.cell_count == 3
        assert scn.cell_azimuth.tolist() == [0.0, 120.0, 240.0]


class TestAntenna:
    def test_boresight_gives_peak_gain(self):
        cfg = NetworkConfig()
        assert antenna_gain(0.0, 0.0, cfg) == pytest.approx(cfg.antenna_peak_gain_dbi)

    def test_half_beamwidth_is_3db_down(self):
        cfg = NetworkConfig()
        peak = cfg.antenna_peak_gain_dbi
        assert antenna_gain(60.0, 0.0, cfg) == pytest.approx(peak - 3.0)
        assert antenna_gain(0.0, 6.5, cfg) == pytest.approx(peak - 3.0)

    def test_floor_applies(self):
        cfg = NetworkConfig()
        assert antenna_gain(180.0, 0.0, cfg) == pytest.approx(
            cfg.antenna_peak_gain_dbi - cfg.antenna_max_attenuation_db)

    def test_azimuth_symmetry(self, rng):
        cfg = NetworkConfig()
        for _ in range(50):
            az = float(rng.uniform(0, 180))
            el = float(rng.uniform(-30, 30))
            assert antenna_gain(az, el, cfg) == antenna_gain(-az, el, cfg)


class TestPathLoss:
    def test_reference_distance_returns_intercept(self):
        model = PathLossModel()
        assert path_loss([0, 0, 0], [1, 0, 0], model) == pytest.approx(
            model.intercept_db)

    def test_doubling_distance(self):
        model = PathLossModel(exponent=2.2)
        d1 = path_loss([0, 0, 0], [500, 0, 0], model)
        d2 = path_loss([0, 0, 0], [1000, 0, 0], model)
        assert d2 - d1 == pytest.approx(10 * 2.2 * np.log10(2.0))

    def test_default_kilometre_value_pinned(self):
        # regression for the default close-to-LoS model near 2 GHz
        assert path_loss([0, 0, 0], [1000, 0, 0], PathLossModel()) == pytest.approx(
            104.468383135163, abs=1e-9)

    def test_zero_distance_rejected(self):
        with pytest.raises(ValueError):
            path_loss([1, 2, 3], [1, 2, 3], PathLossModel())

    def test_free_space_intercept(self):
        # 20 log10(4 pi d f / c) at d = 1 m, f = 2 GHz
        assert free_space_intercept_db(2e9) == pytest.approx(38.4684, abs=1e-3)


class TestThermalNoise:
    def test_per_hertz_density(self):
        watts = thermal_noise(1.0, 290.0)
        assert watts == pytest.approx(4.0039e-21, rel=1e-4)
        assert 10 * np.log10(watts * 1000) == pytest.approx(-173.975, abs=1e-3)

    def test_18mhz_band(self):
        dbm = 10 * np.log10(thermal_noise(18e6, 290.0) * 1000)
        assert dbm == pytest.approx(-101.42, abs=0.01)

    def test_doubling_bandwidth_adds_3db(self):
        a = thermal_noise(1e6, 290.0)
        b = thermal_noise(2e6, 290.0)
        assert 10 * np.log10(b / a) == pytest.approx(3.0103, abs=1e-4)


class TestOlpc:
    def test_fractional_compensation(self):
        assert olpc_power(120.0) == pytest.approx(-90.8 + 0.8 * 120.0)
        assert olpc_power(120.0) == pytest.approx(5.2)

    def test_power_cap(self):
        assert olpc_power(160.0) == pytest.approx(23.0)

    def test_zero_alpha_ignores_path_loss(self):
        for pl in (10.0, 100.0, 190.0):
            assert olpc_power(pl, alpha=0.0) == pytest.approx(-90.8)

    def test_alpha_range_checked(self):
        with pytest.raises(ValueError):
            olpc_power(100.0, alpha=1.5)


class TestPlacement:
    def test_reproducible_bitwise(self, default_scenario, seed0):
        again = place_uavs(default_scenario, [0, 0])
        assert again.positions.tolist() == seed0.positions.tolist()
        assert again.serving_assignment.tolist() == seed0.serving_assignment.tolist()

    def test_one_uav_per_cell_at_height(self, default_scenario, seed0):
        assert seed0.positions.shape == (48, 3)
        assert np.all(seed0.positions[:, 2] == 60.0)
        assert seed0.serving_assignment.tolist() == list(range(48))

    def test_assigned_cell_is_strongest_server(self, default_scenario, seed0):
        for c in range(48):
            gains = coupling_gain_db(default_scenario, seed0.positions[c])
            assert int(np.argmax(gains)) == c

    def test_different_seeds_differ(self, default_scenario, seed0):
        other = place_uavs(default_scenario, [0, 1])
        assert other.positions.tolist() != seed0.positions.tolist()


class TestGainMatrix:
    def test_matches_pinned_fixture(self, default_scenario, seed0):
        prob = gain_matrix(default_scenario, seed0)
        fix = json.loads(FIXTURE.read_text())
        assert np.allclose(seed0.positions, np.array(fix["positions"]),
                           rtol=0, atol=0)
        assert np.allclose(prob.gains, np.array(fix["gains"]), rtol=1e-15, atol=0)
        assert np.allclose(prob.noise_w, np.array(fix["noise_w"]), rtol=1e-15)

    def test_problem_invariants(self, default_scenario, seed0):
        prob = gain_matrix(default_scenario, seed0)
        assert np.all(np.diag(prob.gains) > 0)
        assert np.all(np.argmax(prob.gains, axis=1) == np.arange(48))
        assert prob.weights == pytest.approx(np.full(48, 1 / 48))
        assert prob.p_max_w == pytest.approx(np.full(48, dbm_to_watts(23.0)))
        assert np.all(prob.p_min_w == 1e-12)

    def test_dbm_round_trip(self):
        watts = dbm_to_watts(23.0)
        assert watts == pytest.approx(0.19952623149688797)
        assert watts_to_dbm(watts) == pytest.approx(23.0)
