"""Sectorized hexagonal cellular layout with one aerial user per cell.

Sites sit on a hexagonal lattice, each carrying three sector antennas with a
parabolic (in dB) pattern; users hover at a fixed height with
omnidirectional antennas, one per cell, placed uniformly over the part of
the cell where that cell is the strongest server.  Channel gain is
log-distance path loss plus the sector pattern (no shadowing, no fast
fading), which makes every draw reproducible from its seed alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .power import PowerControlProblem

BOLTZMANN = 1.380649e-23  # J/K

_PLACEMENT_CAP = 20000


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, float) - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * np.log10(np.asarray(watts, float)) + 30.0


def free_space_intercept_db(frequency_hz: float, ref_distance_m: float = 1.0) -> float:
    """Free-space path loss at the reference distance, in dB."""
    c = 299792458.0
    return float(20.0 * np.log10(4.0 * np.pi * ref_distance_m * frequency_hz / c))


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance model ``PL = intercept + 10 * exponent * log10(d / d_ref)``.

    Defaults describe a close-to-line-of-sight channel around 2 GHz; the
    intercept is free-space loss at 1 m for that carrier.
    """

    exponent: float = 2.2
    intercept_db: float = free_space_intercept_db(2.0e9)
    ref_distance_m: float = 1.0
    frequency_hz: float = 2.0e9


@dataclass(frozen=True)
class NetworkConfig:
    site_rows: int = 4
    site_cols: int = 4
    sectors_per_site: int = 3
    bs_spacing_m: float = 2000.0
    bs_height_m: float = 35.0
    hpbw_azimuth_deg: float = 120.0
    hpbw_elevation_deg: float = 13.0
    downtilt_deg: float = 8.5
    uav_height_m: float = 60.0
    max_tx_power_dbm: float = 23.0
    min_tx_power_w: float = 1e-12
    temperature_k: float = 290.0
    bandwidth_hz: float = 18e6
    antenna_peak_gain_dbi: float = 14.0
    antenna_max_attenuation_db: float = 25.0
    rate_a: float = 1.0
    rate_b: float = 1.0
    pathloss: PathLossModel = field(default_factory=PathLossModel)

    def __post_init__(self):
        if self.site_rows < 1 or self.site_cols < 1 or self.sectors_per_site < 1:
            raise ValueError("grid dimensions and sector count must be positive")
        for name in ("bs_spacing_m", "bs_height_m", "uav_height_m",
                     "temperature_k", "bandwidth_hz", "hpbw_azimuth_deg",
                     "hpbw_elevation_deg"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def cell_count(self) -> int:
        return self.site_rows * self.site_cols * self.sectors_per_site


@dataclass(frozen=True)
class Scenario:
    config: NetworkConfig
    sites: np.ndarray        # (S, 2) site coordinates, meters
    cell_site: np.ndarray    # (C,) site index of each cell
    cell_azimuth: np.ndarray  # (C,) boresight azimuth, degrees

    @property
    def cell_count(self) -> int:
        return self.cell_site.shape[0]


@dataclass(frozen=True)
class Realization:
    """One random drop: a user position per cell, served by that cell."""

    seed: tuple
    positions: np.ndarray           # (C, 3) x, y, height
    serving_assignment: np.ndarray  # (C,) cell index per user


def build_hex_network(cfg: NetworkConfig) -> Scenario:
    """Sites on a hexagonal lattice, three sectors each at 0/120/240 degrees."""
    s = cfg.bs_spacing_m
    sites = []
    for row in range(cfg.site_rows):
        for col in range(cfg.site_cols):
            x = s * (col + 0.5 * (row % 2))
            y = s * (np.sqrt(3.0) / 2.0) * row
            sites.append((x, y))
    sites = np.array(sites, dtype=float)
    n_sites = sites.shape[0]
    k = cfg.sectors_per_site
    cell_site = np.repeat(np.arange(n_sites), k)
    cell_azimuth = np.tile(np.arange(k) * (360.0 / k), n_sites)
    return Scenario(config=cfg, sites=sites, cell_site=cell_site,
                    cell_azimuth=cell_azimuth)


def antenna_gain(azimuth_off_deg, elevation_off_deg, cfg: NetworkConfig):
    """Sector antenna gain (dBi) at the given offsets from boresight.

    Parabolic pattern per plane, each plane and the combination floored at
    the front-to-back attenuation.  Boresight returns the peak gain.
    """
    am = cfg.antenna_max_attenuation_db
    az = np.minimum(12.0 * (np.asarray(azimuth_off_deg, float) / cfg.hpbw_azimuth_deg) ** 2, am)
    el = np.minimum(12.0 * (np.asarray(elevation_off_deg, float) / cfg.hpbw_elevation_deg) ** 2, am)
    return cfg.antenna_peak_gain_dbi - np.minimum(az + el, am)


def path_loss(tx_pos, rx_pos, model: PathLossModel) -> float:
    """Log-distance path loss in dB between two 3-D points."""
    d = float(np.linalg.norm(np.asarray(tx_pos, float) - np.asarray(rx_pos, float)))
    if d <= 0.0:
        raise ValueError("path loss undefined at zero distance")
    return model.intercept_db + 10.0 * model.exponent * np.log10(d / model.ref_distance_m)


def thermal_noise(bandwidth_hz: float, temperature_k: float) -> float:
    """k_B * T * B in watts."""
    if bandwidth_hz <= 0 or temperature_k <= 0:
        raise ValueError("bandwidth and temperature must be positive")
    return BOLTZMANN * temperature_k * bandwidth_hz


def olpc_power(coupling_loss_db, p0_dbm: float = -90.8, alpha: float = 0.8,
               p_max_dbm: float = 23.0):
    """Open-loop power target ``min(p_max, P0 + alpha * PL)`` in dBm."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return np.minimum(p_max_dbm, p0_dbm + alpha * np.asarray(coupling_loss_db, float))


def _wrap_deg(angle):
    """Wrap angles to (-180, 180]."""
    a = np.mod(np.asarray(angle, float) + 180.0, 360.0) - 180.0
    return np.where(a == -180.0, 180.0, a)


def coupling_gain_db(scenario: Scenario, position) -> np.ndarray:
    """Gain (dB) from an omnidirectional user at ``position`` to every cell."""
    cfg = scenario.config
    pos = np.asarray(position, dtype=float)
    site_xy = scenario.sites[scenario.cell_site]
    dx = pos[0] - site_xy[:, 0]
    dy = pos[1] - site_xy[:, 1]
    horiz = np.hypot(dx, dy)
    d3 = np.sqrt(horiz ** 2 + (pos[2] - cfg.bs_height_m) ** 2)
    bearing = np.degrees(np.arctan2(dy, dx))
    az_off = _wrap_deg(bearing - scenario.cell_azimuth)
    elev = np.degrees(np.arctan2(pos[2] - cfg.bs_height_m, horiz))
    el_off = elev + cfg.downtilt_deg  # boresight points downtilt below horizontal
    gain = antenna_gain(az_off, el_off, cfg)
    pl = cfg.pathloss.intercept_db + 10.0 * cfg.pathloss.exponent * np.log10(
        np.maximum(d3, 1e-9) / cfg.pathloss.ref_distance_m)
    return gain - pl


def _in_hexagon(xy: np.ndarray, half_width: float) -> bool:
    # Voronoi cell of the lattice: flat faces normal to the 0/60/120 degree axes.
    for ang in (0.0, 60.0, 120.0):
        n = np.array([np.cos(np.radians(ang)), np.sin(np.radians(ang))])
        if abs(float(xy @ n)) > half_width:
            return False
    return True


def place_uavs(scenario: Scenario, seed) -> Realization:
    """Drop one user per cell, uniform over the cell's dominance area.

    Candidates are drawn uniformly over the site's hexagon restricted to the
    sector wedge and kept only if the target cell is the strongest server at
    flight height, so the serving assignment is well defined by construction.
    """
    cfg = scenario.config
    rng = np.random.default_rng(seed)
    half_width = cfg.bs_spacing_m / 2.0
    circum = cfg.bs_spacing_m / np.sqrt(3.0)
    wedge = 180.0 / cfg.sectors_per_site
    positions = np.zeros((scenario.cell_count, 3))
    for c in range(scenario.cell_count):
        site = scenario.sites[scenario.cell_site[c]]
        boresight = scenario.cell_azimuth[c]
        for _ in range(_PLACEMENT_CAP):
            local = rng.uniform(-circum, circum, size=2)
            if not _in_hexagon(local, half_width):
                continue
            bearing = np.degrees(np.arctan2(local[1], local[0]))
            if abs(float(_wrap_deg(bearing - boresight))) > wedge:
                continue
            pos = np.array([site[0] + local[0], site[1] + local[1],
                            cfg.uav_height_m])
            if int(np.argmax(coupling_gain_db(scenario, pos))) == c:
                positions[c] = pos
                break
        else:
            raise RuntimeError(f"could not place a user inside cell {c}")
    seed_key = tuple(np.atleast_1d(seed).tolist()) if not np.isscalar(seed) else (int(seed),)
    return Realization(seed=seed_key, positions=positions,
                       serving_assignment=np.arange(scenario.cell_count))


def gain_matrix(scenario: Scenario, realization: Realization) -> PowerControlProblem:
    """Power-control problem for one drop: linear gains, thermal noise, equal weights."""
    cfg = scenario.config
    n = scenario.cell_count
    if realization.positions.shape != (n, 3):
        raise ValueError("realization does not match the scenario size")
    g_db = np.stack([coupling_gain_db(scenario, realization.positions[i])
                     for i in range(n)])
    gains = 10.0 ** (g_db / 10.0)
    noise = np.full(n, thermal_noise(cfg.bandwidth_hz, cfg.temperature_k))
    p_max = np.full(n, 10.0 ** ((cfg.max_tx_power_dbm - 30.0) / 10.0))
    p_min = np.full(n, cfg.min_tx_power_w)
    return PowerControlProblem(
        gains=gains, noise_w=noise, weights=np.full(n, 1.0 / n),
        p_min_w=p_min, p_max_w=p_max, gamma_min=np.zeros(n),
        rate_a=cfg.rate_a, rate_b=cfg.rate_b,
    )
