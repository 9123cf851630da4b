# app/utils.py
from __future__ import annotations

import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

import numpy as np
import yaml

# Порядок строк таблицы аспектов: det(A), B11, B22
PATTERN_ORDER = ("PPP", "PPN", "PNN", "PNP", "NPN", "NPP", "NNP", "NNN")


# ---------- Углы ----------
def wrap_angle(theta: float) -> float:
    """Привести угол к полуинтервалу (−π, π]."""
    return math.pi - (math.pi - theta) % (2.0 * math.pi)


def wrap_angles(theta: np.ndarray) -> np.ndarray:
    """Векторная версия wrap_angle."""
    return np.pi - np.mod(np.pi - theta, 2.0 * np.pi)


def sign_letter(value: int) -> str:
    # P/N как в таблице аспектов
    return "P" if value > 0 else "N"


def sign_char(value: int) -> str:
    return "+" if value > 0 else "-"


def cross2(ux: float, uy: float, vx: float, vy: float) -> float:
    return ux * vy - uy * vx


# ---------- Загрузка значений по умолчанию ----------
_DEFAULTS_PATH = Path(__file__).resolve().parent / "data" / "defaults.yml"


@lru_cache(maxsize=1)
def load_defaults() -> Dict[str, Any]:
    """
    Прочитать defaults.yml и вернуть как dict.
    Кешируем результат в памяти; чтобы сбросить: вызвать load_defaults.cache_clear().
    """
    if not _DEFAULTS_PATH.exists():
        raise FileNotFoundError(f"Не найден файл значений по умолчанию: {_DEFAULTS_PATH}")

    with _DEFAULTS_PATH.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}

    for key in ("geometry", "tolerances", "grid", "atlas", "output", "plot"):
        data.setdefault(key, {})
    return data


def tolerance(name: str) -> float:
    return float(load_defaults()["tolerances"][name])
