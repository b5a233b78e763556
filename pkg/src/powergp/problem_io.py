"""File formats: problem files, scenario configs, and CSV output.

A problem file is JSON with fields ``G`` (row-major linear gains), ``n_watts``,
``w``, ``p_min_watts``, ``p_max_watts``, ``gamma_min``, ``rate_a`` and
``rate_b``.  Rate floors may be given as ``r_min`` (bit/s/Hz) instead of
``gamma_min``; they are converted on load by inverting the rate formula.
Parse errors always name the offending field.
"""

from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .power import PowerControlProblem
from .scenario import NetworkConfig, PathLossModel

CSV_FORMAT_VERSION = 1


class ProblemFormatError(ValueError):
    """A problem or config file failed validation; message names the field."""


def _require(data: dict, name: str):
    if name not in data:
        raise ProblemFormatError(f"missing field '{name}'")
    return data[name]


def _vector(data: dict, name: str, length: int | None = None) -> np.ndarray:
    raw = _require(data, name)
    try:
        v = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"field '{name}' is not numeric: {exc}") from exc
    if v.ndim != 1:
        raise ProblemFormatError(f"field '{name}' must be a flat list")
    if length is not None and v.shape[0] != length:
        raise ProblemFormatError(
            f"field '{name}' must have length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ProblemFormatError(f"field '{name}' contains non-finite entries")
    return v


def problem_from_dict(data: dict) -> PowerControlProblem:
    raw_g = _require(data, "G")
    try:
        g = np.asarray(raw_g, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"field 'G' is not numeric: {exc}") from exc
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ProblemFormatError("field 'G' must be a square matrix")
    n = g.shape[0]
    bad = np.argwhere(~np.isfinite(g) | (g < 0))
    if bad.size:
        i, j = bad[0]
        raise ProblemFormatError(
            f"field 'G[{i}][{j}]': gains must be finite and non-negative, "
            f"got {g[i, j]!r}")
    noise = _vector(data, "n_watts", n)
    w = _vector(data, "w", n)
    p_min = _vector(data, "p_min_watts", n)
    p_max = _vector(data, "p_max_watts", n)
    rate_a = float(data.get("rate_a", 1.0))
    rate_b = float(data.get("rate_b", 1.0))

    if "gamma_min" in data:
        gamma = _vector(data, "gamma_min", n)
    elif "r_min" in data:
        r_min = _vector(data, "r_min", n)
        if np.any(r_min < 0):
            raise ProblemFormatError("field 'r_min' must be non-negative")
        gamma = (np.exp2(r_min / rate_a) - 1.0) / rate_b
    else:
        gamma = np.zeros(n)

    try:
        return PowerControlProblem(
            gains=g, noise_w=noise, weights=w, p_min_w=p_min, p_max_w=p_max,
            gamma_min=gamma, rate_a=rate_a, rate_b=rate_b)
    except ValueError as exc:
        raise ProblemFormatError(str(exc)) from exc


def problem_to_dict(prob: PowerControlProblem) -> dict:
    return {
        "G": prob.gains.tolist(),
        "n_watts": prob.noise_w.tolist(),
        "w": prob.weights.tolist(),
        "p_min_watts": prob.p_min_w.tolist(),
        "p_max_watts": prob.p_max_w.tolist(),
        "gamma_min": prob.gamma_min.tolist(),
        "rate_a": prob.rate_a,
        "rate_b": prob.rate_b,
    }


def load_problem(path) -> PowerControlProblem:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ProblemFormatError("top level must be a JSON object")
    return problem_from_dict(data)


def save_problem(prob: PowerControlProblem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(prob), fh, indent=2)
        fh.write("\n")


def load_example1() -> PowerControlProblem:
    """The packaged four-link benchmark instance."""
    ref = resources.files("powergp").joinpath("data/example1.json")
    with ref.open("r", encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# scenario configs
# ---------------------------------------------------------------------------

_CONFIG_FIELDS = (
    "site_rows", "site_cols", "sectors_per_site", "bs_spacing_m",
    "bs_height_m", "hpbw_azimuth_deg", "hpbw_elevation_deg", "downtilt_deg",
    "uav_height_m", "max_tx_power_dbm", "min_tx_power_w", "temperature_k",
    "bandwidth_hz", "antenna_peak_gain_dbi", "antenna_max_attenuation_db",
    "rate_a", "rate_b",
)


def config_to_dict(cfg: NetworkConfig) -> dict:
    out = {name: getattr(cfg, name) for name in _CONFIG_FIELDS}
    out["pathloss"] = {
        "exponent": cfg.pathloss.exponent,
        "intercept_db": cfg.pathloss.intercept_db,
        "ref_distance_m": cfg.pathloss.ref_distance_m,
        "frequency_hz": cfg.pathloss.frequency_hz,
    }
    return out


def config_from_dict(data: dict) -> NetworkConfig:
    kwargs = {}
    for name in _CONFIG_FIELDS:
        if name in data:
            kwargs[name] = data[name]
    if "pathloss" in data:
        pl = data["pathloss"]
        if not isinstance(pl, dict):
            raise ProblemFormatError("field 'pathloss' must be an object")
        kwargs["pathloss"] = PathLossModel(**pl)
    unknown = set(data) - set(_CONFIG_FIELDS) - {"pathloss"}
    if unknown:
        raise ProblemFormatError(f"unknown config field '{sorted(unknown)[0]}'")
    try:
        return NetworkConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(str(exc)) from exc


def load_config(path) -> NetworkConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(f"not valid JSON: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg: NetworkConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def write_csv(path, schema: str, header: list[str], rows) -> None:
    """Versioned CSV: one comment line naming the schema, then header + rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# powergp-csv v{CSV_FORMAT_VERSION} schema={schema}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def read_csv(path) -> tuple[str, list[str], list[list[str]]]:
    """Read back a versioned CSV; returns (schema, header, rows of strings)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
        schema = ""
        if first.startswith("#"):
            for part in first.split():
                if part.startswith("schema="):
                    schema = part.split("=", 1)[1]
            header_line = fh.readline()
        else:
            header_line = first + "\n"
        reader = csv.reader([header_line] + fh.readlines())
        rows = list(reader)
    return schema, rows[0], rows[1:]
