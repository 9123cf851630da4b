# app/config.py
"""
Разбор файла конфигурации атласа: строки `key = value`, `#`: комментарий.
Обязательны только длины l0..l4, остальное берётся из defaults.yml и окружения.
"""
from __future__ import annotations

import argparse
import math
import os
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

from pydantic import ValidationError

from app.errors import ConfigParseError, ConfigValidationError, OutputError
from app.models import Geometry, GridSpec, RunConfig
from app.utils import load_defaults

LENGTH_KEYS = ("l0", "l1", "l2", "l3", "l4")
RANGE_KEYS = ("x_min", "x_max", "y_min", "y_max")
LIMIT_KEYS = ("theta1_min", "theta1_max", "theta2_min", "theta2_max")
CONFIG_KEYS = (
    LENGTH_KEYS
    + ("nx", "ny")
    + RANGE_KEYS
    + ("connectivity", "eps_a", "eps_b", "residual_tol", "output_dir", "formats", "workers",
       "min_aspect_fraction", "check_resolution")
    + LIMIT_KEYS
)

# поле модели → ключ файла, который стоит назвать в ошибке
_FIELD_TO_KEY = {"x_range": "x_min", "y_range": "y_min", "theta1_range": "theta1_min", "theta2_range": "theta2_min"}


# ---------- Преобразование значений ----------
def _float(key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigValidationError(key, f"expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigValidationError(key, "must be finite")
    return value


def _int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigValidationError(key, f"expected an integer, got {raw!r}") from None


def _bool(key: str, raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigValidationError(key, f"expected true/false, got {raw!r}")


def _formats(key: str, raw: str) -> Tuple[str, ...]:
    items = tuple(x.strip().lower() for x in raw.split(",") if x.strip())
    bad = [x for x in items if x not in ("json", "csv", "svg")]
    if bad:
        raise ConfigValidationError(key, f"unknown format {bad[0]!r}")
    return items


def validated(build: Callable[[], Any]) -> Any:
    """Ошибку pydantic переводим в ConfigValidationError с именем ключа."""
    try:
        return build()
    except ValidationError as e:
        err = e.errors()[0]
        field = str(err["loc"][0]) if err["loc"] else "config"
        raise ConfigValidationError(_FIELD_TO_KEY.get(field, field), err["msg"]) from None


def _pair(values: Dict[str, str], lo: str, hi: str) -> Optional[Tuple[float, float]]:
    have = [k for k in (lo, hi) if k in values]
    if not have:
        return None
    if len(have) != 2:
        missing = lo if lo not in values else hi
        raise ConfigValidationError(missing, f"{lo} and {hi} must be given together")
    return _float(lo, values[lo]), _float(hi, values[hi])


# ---------- Разбор ----------
def read_pairs(text: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(lineno, raw, "expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigParseError(lineno, raw, f"unknown key {key!r}")
        if key in values:
            raise ConfigParseError(lineno, raw, f"duplicate key {key!r}")
        if not value:
            raise ConfigParseError(lineno, raw, "missing value")
        values[key] = value
    return values


def parse_config(text: str) -> RunConfig:
    values = read_pairs(text)
    defaults = load_defaults()

    for key in LENGTH_KEYS:
        if key not in values:
            raise ConfigValidationError(key, "required")
    lengths = {key: _float(key, values[key]) for key in LENGTH_KEYS}
    geometry = validated(lambda: Geometry(
        **lengths,
        theta1_range=_pair(values, "theta1_min", "theta1_max"),
        theta2_range=_pair(values, "theta2_min", "theta2_max"),
    ))

    nx = _int("nx", values["nx"]) if "nx" in values else None
    ny = _int("ny", values["ny"]) if "ny" in values else None
    connectivity = _int("connectivity", values["connectivity"]) if "connectivity" in values else None
    given = [k for k in RANGE_KEYS if k in values]
    if given and len(given) != len(RANGE_KEYS):
        missing = next(k for k in RANGE_KEYS if k not in values)
        raise ConfigValidationError(missing, "grid ranges must be given all four or none")
    if given:
        grid_d = defaults["grid"]
        grid = validated(lambda: GridSpec(
            x_range=(_float("x_min", values["x_min"]), _float("x_max", values["x_max"])),
            y_range=(_float("y_min", values["y_min"]), _float("y_max", values["y_max"])),
            nx=nx if nx is not None else int(grid_d["nx"]),
            ny=ny if ny is not None else int(grid_d["ny"]),
            connectivity=connectivity if connectivity is not None else int(grid_d["connectivity"]),
        ))
    else:
        grid = validated(lambda: GridSpec.default_for(geometry, nx, ny, connectivity))

    atlas_d, out_d = defaults["atlas"], defaults["output"]
    options: Dict[str, Any] = {
        "geometry": geometry,
        "grid": grid,
        "output_dir": Path(values.get("output_dir") or os.getenv("FIVEBAR_OUTPUT_DIR") or out_d.get("dir", "out")),
        "formats": _formats("formats", values["formats"]) if "formats" in values else tuple(out_d["formats"]),
        "workers": _int("workers", values["workers"]) if "workers" in values
        else _int("FIVEBAR_WORKERS", os.getenv("FIVEBAR_WORKERS") or "1"),
        "min_aspect_fraction": _float("min_aspect_fraction", values["min_aspect_fraction"])
        if "min_aspect_fraction" in values else float(atlas_d["min_aspect_fraction"]),
        "check_resolution": _bool("check_resolution", values["check_resolution"])
        if "check_resolution" in values else bool(atlas_d["check_resolution"]),
    }
    for key in ("eps_a", "eps_b", "residual_tol"):
        if key in values:
            options[key] = _float(key, values[key])
    return validated(lambda: RunConfig(**options))


def load_config(path: Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot read config {path}: {e}") from e
    return parse_config(text)


def default_run_config(geometry: Optional[Geometry] = None) -> RunConfig:
    """Геометрия из примера и все значения по умолчанию."""
    g = geometry or Geometry.reference()
    text = "\n".join(f"{k} = {getattr(g, k)!r}" for k in LENGTH_KEYS)
    return parse_config(text)


# ---------- Аргументы CLI для геометрии ----------
def add_geometry_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("geometry")
    group.add_argument("--config", type=Path, help="config file (key = value)")
    for key in LENGTH_KEYS:
        group.add_argument(f"--{key}", type=float, help=f"link length {key} (overrides config)")


def geometry_from_args(args: argparse.Namespace) -> Geometry:
    base = load_config(args.config).geometry if getattr(args, "config", None) else Geometry.reference()
    overrides = {k: getattr(args, k) for k in LENGTH_KEYS if getattr(args, k, None) is not None}
    if not overrides:
        return base
    return validated(lambda: Geometry(**{**base.model_dump(), **overrides}))
