# tests/helpers.py
import math

import numpy as np

from app.calculators.atlas import WorkspaceField
from app.models import Geometry, GridSpec, WorkingMode


def reachable_points(g: Geometry, rng: np.random.Generator, n: int) -> np.ndarray:
    """Случайные точки внутри обоих колец досягаемости."""
    r1_min, r1_max = g.leg1_annulus
    r2_min, r2_max = g.leg2_annulus
    out = []
    while len(out) < n:
        x = rng.uniform(-r1_max, g.l0 + r2_max)
        y = rng.uniform(-r1_max, r1_max)
        r1, r2 = math.hypot(x, y), math.hypot(x - g.l0, y)
        if r1_min < r1 < r1_max and r2_min < r2 < r2_max:
            out.append((x, y))
    return np.array(out)


def synthetic_field(sign, mode: WorkingMode = WorkingMode(signs=(1, 1))) -> WorkspaceField:
    """Поле с заданными знаками; все ячейки со знаком считаются достижимыми."""
    sign = np.asarray(sign, dtype=np.int8)
    ny, nx = sign.shape
    grid = GridSpec(x_range=(0.0, float(nx)), y_range=(0.0, float(ny)), nx=nx, ny=ny)
    feasible = sign != 0
    theta = np.where(feasible, np.arange(ny * nx, dtype=float).reshape(ny, nx) / (ny * nx), np.nan)
    return WorkspaceField(
        geometry=Geometry(l0=9, l1=8, l2=5, l3=5, l4=8),
        grid=grid,
        mode=mode,
        feasible=feasible,
        sign=sign,
        det_a=np.where(feasible, sign.astype(float), np.nan),
        corner_det_a=np.full((ny + 1, nx + 1), np.nan),
        theta1=theta,
        theta2=-theta,
    )
