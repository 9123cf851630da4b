# app/models.py
from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.utils import PATTERN_ORDER, load_defaults, sign_char, sign_letter, tolerance, wrap_angle


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


# ---------- Геометрия и конфигурации ----------
class Point2(_Frozen):
    x: float
    y: float

    @field_validator("x", "y")
    @classmethod
    def _finite_xy(cls, v: float) -> float:
        return _finite(v)


class Geometry(_Frozen):
    """Длины пятизвенника; A = (0, 0), B = (l0, 0). Нога 1: A–C–P, нога 2: B–D–P."""
    l0: float
    l1: float
    l2: float
    l3: float
    l4: float
    # пределы приводов (θ_min, θ_max); None: без ограничений
    theta1_range: Optional[Tuple[float, float]] = None
    theta2_range: Optional[Tuple[float, float]] = None

    @field_validator("l0", "l1", "l2", "l3", "l4")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError("length must be positive and finite")
        return v

    @field_validator("theta1_range", "theta2_range")
    @classmethod
    def _ordered(cls, v: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if v is not None and not (v[0] < v[1]):
            raise ValueError("joint range must satisfy min < max")
        return v

    @classmethod
    def reference(cls) -> "Geometry":
        return cls(**load_defaults()["geometry"])

    @property
    def a(self) -> Point2:
        return Point2(x=0.0, y=0.0)

    @property
    def b(self) -> Point2:
        return Point2(x=self.l0, y=0.0)

    @property
    def max_length(self) -> float:
        return max(self.l0, self.l1, self.l2, self.l3, self.l4)

    @property
    def leg1_annulus(self) -> Tuple[float, float]:
        return abs(self.l1 - self.l2), self.l1 + self.l2

    @property
    def leg2_annulus(self) -> Tuple[float, float]:
        return abs(self.l3 - self.l4), self.l3 + self.l4

    @property
    def has_workspace(self) -> bool:
        """Пересекаются ли кольца досягаемости двух ног."""
        r1_min, r1_max = self.leg1_annulus
        r2_min, r2_max = self.leg2_annulus
        gap = max(0.0, r1_min - r2_max, r2_min - r1_max)
        return gap <= self.l0 <= r1_max + r2_max

    @property
    def residual_tol(self) -> float:
        return tolerance("residual_rel") * self.max_length


class JointConfig(_Frozen):
    theta1: float
    theta2: float

    @field_validator("theta1", "theta2")
    @classmethod
    def _wrap(cls, v: float) -> float:
        return wrap_angle(_finite(v))


class PassiveAngles(_Frozen):
    theta3: float
    theta4: float

    @field_validator("theta3", "theta4")
    @classmethod
    def _wrap(cls, v: float) -> float:
        return wrap_angle(_finite(v))


class AssemblyMode(_Frozen):
    # sign(det A) в точке сборки
    sign: Literal[1, -1]

    @property
    def label(self) -> str:
        return sign_char(self.sign)


class WorkingMode(_Frozen):
    """Знаки диагональных элементов B, по одному на ногу."""
    signs: Tuple[int, ...]

    @field_validator("signs")
    @classmethod
    def _nonzero(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v:
            raise ValueError("working mode needs at least one leg")
        if any(s not in (1, -1) for s in v):
            raise ValueError("working mode signs must be +1 or -1")
        return v

    @classmethod
    def from_label(cls, label: str) -> "WorkingMode":
        if not label or any(ch not in "+-" for ch in label):
            raise ValueError(f"bad working mode {label!r}, expected e.g. '+-'")
        return cls(signs=tuple(1 if ch == "+" else -1 for ch in label))

    @property
    def label(self) -> str:
        return "".join(sign_char(s) for s in self.signs)


class LegSolution(_Frozen):
    theta_actuated: float
    theta_passive: float
    flags: Tuple[str, ...] = ()


class FullConfig(_Frozen):
    geometry: Geometry
    q: JointConfig
    passive: PassiveAngles
    p: Point2
    flags: Tuple[str, ...] = ()

    @property
    def c(self) -> Point2:
        g, t = self.geometry, self.q.theta1
        return Point2(x=g.l1 * math.cos(t), y=g.l1 * math.sin(t))

    @property
    def d(self) -> Point2:
        g, t = self.geometry, self.q.theta2
        return Point2(x=g.l0 + g.l3 * math.cos(t), y=g.l3 * math.sin(t))

    def residual(self) -> float:
        c, d, p, g = self.c, self.d, self.p, self.geometry
        return max(
            abs(math.hypot(p.x - c.x, p.y - c.y) - g.l2),
            abs(math.hypot(p.x - d.x, p.y - d.y) - g.l4),
        )

    @model_validator(mode="after")
    def _closed(self) -> "FullConfig":
        if self.residual() > self.geometry.residual_tol:
            raise ValueError(f"loop closure residual {self.residual():.3e} exceeds tolerance")
        return self


# ---------- Якобианы ----------
Matrix2 = Tuple[Tuple[float, float], Tuple[float, float]]


class KinematicMatrices(_Frozen):
    a: Matrix2
    b: Matrix2

    @field_validator("b")
    @classmethod
    def _diagonal(cls, v: Matrix2) -> Matrix2:
        if v[0][1] != 0.0 or v[1][0] != 0.0:
            raise ValueError("inverse-kinematics matrix must be diagonal")
        return v

    @property
    def a_array(self) -> np.ndarray:
        return np.array(self.a, dtype=float)

    @property
    def b_array(self) -> np.ndarray:
        return np.array(self.b, dtype=float)


class SingularityClass(str, Enum):
    REGULAR = "Regular"
    SERIAL = "Serial"
    PARALLEL = "Parallel"
    BOTH = "Both"


# ---------- Атлас ----------
class GridSpec(_Frozen):
    x_range: Tuple[float, float]
    y_range: Tuple[float, float]
    nx: int = Field(ge=2)
    ny: int = Field(ge=2)
    connectivity: Literal[4, 8] = 4

    @field_validator("x_range", "y_range")
    @classmethod
    def _range(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if not (math.isfinite(v[0]) and math.isfinite(v[1]) and v[0] < v[1]):
            raise ValueError("range must be finite with min < max")
        return v

    @classmethod
    def default_for(cls, g: Geometry, nx: Optional[int] = None, ny: Optional[int] = None,
                    connectivity: Optional[int] = None) -> "GridSpec":
        """Прямоугольник, накрывающий оба кольца досягаемости, с полями по краям."""
        d = load_defaults()["grid"]
        reach1, reach2 = g.l1 + g.l2, g.l3 + g.l4
        x_lo, x_hi = min(-reach1, g.l0 - reach2), max(reach1, g.l0 + reach2)
        y_hi = max(reach1, reach2)
        mx = float(d["margin"]) * (x_hi - x_lo)
        my = float(d["margin"]) * 2.0 * y_hi
        return cls(
            x_range=(x_lo - mx, x_hi + mx),
            y_range=(-y_hi - my, y_hi + my),
            nx=nx or int(d["nx"]),
            ny=ny or int(d["ny"]),
            connectivity=connectivity or int(d["connectivity"]),
        )

    def halved(self) -> "GridSpec":
        return self.model_copy(update={"nx": max(2, self.nx // 2), "ny": max(2, self.ny // 2)})

    @property
    def dx(self) -> float:
        return (self.x_range[1] - self.x_range[0]) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_range[1] - self.y_range[0]) / self.ny

    @property
    def x_edges(self) -> np.ndarray:
        return np.linspace(self.x_range[0], self.x_range[1], self.nx + 1)

    @property
    def y_edges(self) -> np.ndarray:
        return np.linspace(self.y_range[0], self.y_range[1], self.ny + 1)

    @property
    def x_centers(self) -> np.ndarray:
        e = self.x_edges
        return 0.5 * (e[:-1] + e[1:])

    @property
    def y_centers(self) -> np.ndarray:
        e = self.y_edges
        return 0.5 * (e[:-1] + e[1:])


class CellRecord(_Frozen):
    pose: Point2
    mode: WorkingMode
    feasible: bool
    det_a_sign: Literal[-1, 0, 1]
    q: Optional[JointConfig] = None
    label: Optional[str] = None

    @model_validator(mode="after")
    def _q_iff_feasible(self) -> "CellRecord":
        if self.feasible != (self.q is not None):
            raise ValueError("q must be present exactly for feasible cells")
        return self


class AspectId(_Frozen):
    mode: WorkingMode
    det_a_sign: Literal[1, -1]
    component_index: int = Field(ge=0)

    @property
    def pattern(self) -> str:
        return sign_letter(self.det_a_sign) + "".join(sign_letter(s) for s in self.mode.signs)

    @property
    def key(self) -> str:
        return f"{self.mode.label}:{sign_letter(self.det_a_sign)}:{self.component_index}"


class AspectRow(_Frozen):
    detA: Literal["P", "N"]
    b11: Literal["P", "N"]
    b22: Literal["P", "N"]
    count: int = Field(ge=0)

    @property
    def pattern(self) -> str:
        return self.detA + self.b11 + self.b22


class AspectSummary(_Frozen):
    id: str
    mode: str
    sign: Literal["P", "N"]
    cells: int
    bbox: Tuple[float, float, float, float]


class AspectReport(_Frozen):
    geometry: Geometry
    grid: GridSpec
    rows: List[AspectRow]
    total: int
    aspects: List[AspectSummary] = []
    fragments: int = 0
    warnings: List[str] = []

    @model_validator(mode="after")
    def _consistent(self) -> "AspectReport":
        if sorted(r.pattern for r in self.rows) != sorted(PATTERN_ORDER):
            raise ValueError("rows must cover the 8 sign patterns exactly once")
        if self.total != sum(r.count for r in self.rows):
            raise ValueError("total must equal the sum of row counts")
        return self

    def counts(self) -> Dict[str, int]:
        return {r.pattern: r.count for r in self.rows}


# ---------- CLI ----------
class PlotStyle(_Frozen):
    colors: Dict[str, str]
    boundary_color: str = "#222222"
    boundary_width: float = 1.2
    serial_color: str = "#888888"
    px_per_unit: float = 40.0
    joint_panel_px: int = 480

    @field_validator("colors")
    @classmethod
    def _eight_distinct(cls, v: Dict[str, str]) -> Dict[str, str]:
        if sorted(v) != sorted(PATTERN_ORDER):
            raise ValueError("colour table must name the 8 sign patterns")
        if len({c.lower() for c in v.values()}) != 8:
            raise ValueError("colour table must hold 8 distinct colours")
        return v

    @classmethod
    def from_defaults(cls) -> "PlotStyle":
        return cls(**load_defaults()["plot"])


class RunConfig(_Frozen):
    geometry: Geometry
    grid: GridSpec
    eps_a: Optional[float] = Field(default=None, gt=0)
    eps_b: Optional[float] = Field(default=None, gt=0)
    residual_tol: Optional[float] = Field(default=None, gt=0)
    output_dir: Path = Path("out")
    formats: Tuple[Literal["json", "csv", "svg"], ...] = ("json", "csv", "svg")
    workers: int = Field(default=1, ge=1)
    min_aspect_fraction: float = Field(default=1e-3, ge=0, lt=1)
    check_resolution: bool = True

    @field_validator("formats")
    @classmethod
    def _some_format(cls, v: Tuple[str, ...]) -> Tuple[str, ...]:
        if not v:
            raise ValueError("at least one output format is required")
        return tuple(dict.fromkeys(v))
