"""Problem descriptions (JSON) and report serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .effective import MaterialPair
from .geometry import EllipsoidSpec

__all__ = ["ConfigError", "ProblemConfig", "load_config", "parse_config", "dumps"]


class ConfigError(ValueError):
    pass


_GEOMETRY_FORMS = {
    "confocal": {"c", "rho_c", "rho_e"},
    "volume_fraction": {"semi_axes", "theta1"},
    "sphere": {"r_c", "r_e"},
}

_RUN_DEFAULTS = {
    "axis": 1,
    "grid_n": 64,
    "tol": 1e-8,
    "lin_tol": 1e-10,
    "max_iter": 200,
    "omega": 0.5,
    "seed": 0,
    "subsample": 1,
    "matrix": "effective",
    "n_samples": 500,
    "box_factor": 2.0,
    "neutral_threshold": 0.02,
    "target_fill": 0.3,
    "max_inclusions": 10_000,
    "levels": 8,
    "ratio": 0.7,
    "lam0": None,
    "max_failures": 5_000,
    "verify": False,
}


@dataclass
class ProblemConfig:
    spec: EllipsoidSpec
    materials: MaterialPair
    run: dict = field(default_factory=lambda: dict(_RUN_DEFAULTS))
    sweep: dict | None = None
    geometry_form: str = "confocal"


def _number(block: dict, key: str, where: str) -> float:
    if key not in block:
        raise ConfigError(f"{where}: missing '{key}'")
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: '{key}' must be a finite number, got {value!r}")
    return float(value)


def _geometry(block) -> tuple[EllipsoidSpec, str]:
    if not isinstance(block, dict):
        raise ConfigError("'geometry' must be an object")
    keys = set(block)
    matches = [name for name, req in _GEOMETRY_FORMS.items() if keys & req]
    if len(matches) != 1 or keys != _GEOMETRY_FORMS[matches[0]]:
        raise ConfigError(
            "geometry needs exactly one of: {c, rho_c, rho_e}, {semi_axes, theta1}, {r_c, r_e}; "
            f"got keys {sorted(keys)}"
        )
    form = matches[0]
    try:
        if form == "confocal":
            c = block["c"]
            if not isinstance(c, list) or len(c) != 3:
                raise ConfigError("geometry.c must be a list of three numbers")
            return EllipsoidSpec(*[float(v) for v in c], _number(block, "rho_c", "geometry"),
                                 _number(block, "rho_e", "geometry")), form
        if form == "volume_fraction":
            axes = block["semi_axes"]
            if not isinstance(axes, list) or len(axes) != 3:
                raise ConfigError("geometry.semi_axes must be a list of three numbers")
            return EllipsoidSpec.from_volume_fraction([float(v) for v in axes],
                                                      _number(block, "theta1", "geometry")), form
        return EllipsoidSpec.from_sphere_radii(_number(block, "r_c", "geometry"),
                                               _number(block, "r_e", "geometry")), form
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"geometry: {exc}") from exc


def _materials(block) -> MaterialPair:
    if not isinstance(block, dict):
        raise ConfigError("'materials' must be an object")
    unknown = set(block) - {"sigma1", "sigma2", "p", "E"}
    if unknown:
        raise ConfigError(f"materials: unknown keys {sorted(unknown)}")
    vals = {k: _number(block, k, "materials") for k in ("sigma1", "sigma2")}
    vals["p"] = _number(block, "p", "materials") if "p" in block else 2.0
    vals["E"] = _number(block, "E", "materials") if "E" in block else 1.0
    try:
        return MaterialPair(**vals)
    except ValueError as exc:
        raise ConfigError(f"materials: {exc}") from exc


def _run(block) -> dict:
    if block is None:
        block = {}
    if not isinstance(block, dict):
        raise ConfigError("'run' must be an object")
    unknown = set(block) - set(_RUN_DEFAULTS)
    if unknown:
        raise ConfigError(f"run: unknown keys {sorted(unknown)}")
    run = dict(_RUN_DEFAULTS)
    run.update(block)
    validate_run(run)
    return run


def validate_run(run: dict) -> None:
    if run["axis"] not in (1, 2, 3):
        raise ConfigError(f"run.axis must be 1, 2 or 3, got {run['axis']!r}")
    n = run["grid_n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 16 or n % 2:
        raise ConfigError(f"run.grid_n must be an even integer >= 16, got {n!r}")
    for key in ("tol", "lin_tol", "omega", "box_factor"):
        if not isinstance(run[key], (int, float)) or not run[key] > 0:
            raise ConfigError(f"run.{key} must be positive, got {run[key]!r}")
    if not isinstance(run["seed"], int):
        raise ConfigError(f"run.seed must be an integer, got {run['seed']!r}")
    if not isinstance(run["subsample"], int) or run["subsample"] < 1:
        raise ConfigError(f"run.subsample must be a positive integer, got {run['subsample']!r}")
    m = run["matrix"]
    if not (m in ("effective", "coating") or (isinstance(m, (int, float)) and m > 0)):
        raise ConfigError(f"run.matrix must be 'effective', 'coating' or a positive number, got {m!r}")
    if not 0 < run["target_fill"] < 1:
        raise ConfigError(f"run.target_fill must lie in (0, 1), got {run['target_fill']!r}")


def parse_config(data: dict) -> ProblemConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(data) - {"geometry", "materials", "run", "sweep"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    if "geometry" not in data or "materials" not in data:
        raise ConfigError("configuration needs 'geometry' and 'materials' blocks")
    spec, form = _geometry(data["geometry"])
    mat = _materials(data["materials"])
    run = _run(data.get("run"))
    sweep = data.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or set(sweep) != {"parameter", "values"}:
            raise ConfigError("sweep must be an object with 'parameter' and 'values'")
        if sweep["parameter"] not in ("p", "sigma1", "sigma2", "E", "theta1"):
            raise ConfigError(f"cannot sweep over {sweep['parameter']!r}")
        if not isinstance(sweep["values"], list) or not sweep["values"]:
            raise ConfigError("sweep.values must be a non-empty list")
    return ProblemConfig(spec, mat, run, sweep, form)


def load_config(path) -> ProblemConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0)
