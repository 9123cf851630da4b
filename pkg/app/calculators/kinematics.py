# app/calculators/kinematics.py
"""
Позиционная кинематика пятизвенника RR-RRR.

ОЗК собирается из двух задач для ноги 2R (закон косинусов), ПЗК: пересечение
окружностей (C, l2) и (D, l4). Все углы приводятся к (−π, π].
"""
from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np

from app.errors import ModeBoundary, NoAssembly, Unreachable
from app.models import (
    AssemblyMode,
    FullConfig,
    Geometry,
    JointConfig,
    LegSolution,
    PassiveAngles,
    Point2,
    WorkingMode,
)
from app.utils import tolerance, wrap_angle, wrap_angles

# Флаги (не ошибки), по аналогии с DoseResult.flags
BOUNDARY_POSTURE = "BoundaryPosture"
TANGENT = "Tangent"


# ---------- Одна нога 2R ----------
def leg_ik(anchor: Point2, proximal: float, distal: float, target: Point2, branch: int) -> LegSolution:
    """
    ОЗК ноги: угол привода θa и угол дистального звена θp.
    Ветвь выбирается знаком sin(θp − θa), т.е. знаком B_jj.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")

    ex, ey = target.x - anchor.x, target.y - anchor.y
    r = math.hypot(ex, ey)
    slack = tolerance("residual_rel") * max(proximal, distal)
    if r > proximal + distal + slack or r < abs(proximal - distal) - slack:
        raise Unreachable(
            f"distance {r:.6g} outside leg annulus [{abs(proximal - distal):.6g}, {proximal + distal:.6g}]"
        )

    if r <= slack:
        # цель в точке опоры: любой θa подходит, берём 0
        theta_a = 0.0
    else:
        cos_alpha = (proximal * proximal + r * r - distal * distal) / (2.0 * proximal * r)
        alpha = math.acos(min(1.0, max(-1.0, cos_alpha)))
        theta_a = math.atan2(ey, ex) - branch * alpha

    elbow_x = anchor.x + proximal * math.cos(theta_a)
    elbow_y = anchor.y + proximal * math.sin(theta_a)
    theta_p = math.atan2(target.y - elbow_y, target.x - elbow_x)

    flags: Tuple[str, ...] = ()
    if abs(math.sin(theta_p - theta_a)) <= tolerance("angular"):
        flags = (BOUNDARY_POSTURE,)
    return LegSolution(theta_actuated=wrap_angle(theta_a), theta_passive=wrap_angle(theta_p), flags=flags)


def leg_ik_arrays(
    anchor: Tuple[float, float],
    proximal: float,
    distal: float,
    px: np.ndarray,
    py: np.ndarray,
    branch: int,
    slack: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Векторная leg_ik для сетки точек: (θa, θp, reachable). Вне кольца углы = nan."""
    ex, ey = px - anchor[0], py - anchor[1]
    r = np.hypot(ex, ey)
    if slack is None:
        slack = tolerance("residual_rel") * max(proximal, distal)
    reachable = (r <= proximal + distal + slack) & (r >= abs(proximal - distal) - slack)

    with np.errstate(divide="ignore", invalid="ignore"):
        cos_alpha = (proximal * proximal + r * r - distal * distal) / (2.0 * proximal * r)
    alpha = np.arccos(np.clip(np.nan_to_num(cos_alpha, nan=1.0), -1.0, 1.0))
    theta_a = np.where(r <= slack, 0.0, np.arctan2(ey, ex) - branch * alpha)
    theta_p = np.arctan2(py - (anchor[1] + proximal * np.sin(theta_a)), px - (anchor[0] + proximal * np.cos(theta_a)))

    theta_a = np.where(reachable, wrap_angles(theta_a), np.nan)
    theta_p = np.where(reachable, wrap_angles(theta_p), np.nan)
    return theta_a, theta_p, reachable


def within_limits(theta: float, limits: Optional[Tuple[float, float]]) -> bool:
    # пределы задаются в той же нормировке (−π, π]
    return limits is None or limits[0] <= theta <= limits[1]


# ---------- ОЗК ----------
def inverse_kinematics(
    g: Geometry, p: Point2, mode: WorkingMode, eps_b: Optional[float] = None
) -> FullConfig:
    """Единственная конфигурация с заданным рабочим режимом в точке p."""
    if len(mode.signs) != 2:
        raise ValueError("five-bar working mode has exactly two signs")
    s1, s2 = mode.signs

    leg1 = leg_ik(g.a, g.l1, g.l2, p, s1)
    leg2 = leg_ik(g.b, g.l3, g.l4, p, s2)
    theta1, theta3 = leg1.theta_actuated, leg1.theta_passive
    theta2, theta4 = leg2.theta_actuated, leg2.theta_passive

    if not within_limits(theta1, g.theta1_range):
        raise Unreachable(f"theta1 = {theta1:.6g} outside actuator range {g.theta1_range}")
    if not within_limits(theta2, g.theta2_range):
        raise Unreachable(f"theta2 = {theta2:.6g} outside actuator range {g.theta2_range}")

    if eps_b is None:
        eps_b = tolerance("det_rel") * max(g.l1 * g.l2, g.l3 * g.l4)
    b11 = g.l1 * g.l2 * math.sin(theta3 - theta1)
    b22 = g.l3 * g.l4 * math.sin(theta4 - theta2)
    if abs(b11) <= eps_b or abs(b22) <= eps_b:
        raise ModeBoundary(f"B11 = {b11:.3e}, B22 = {b22:.3e}: working mode undefined at ({p.x:.6g}, {p.y:.6g})")

    flags = tuple(dict.fromkeys(leg1.flags + leg2.flags))
    return FullConfig(
        geometry=g,
        q=JointConfig(theta1=theta1, theta2=theta2),
        passive=PassiveAngles(theta3=theta3, theta4=theta4),
        p=p,
        flags=flags,
    )


# ---------- ПЗК ----------
def _assemblies(g: Geometry, q: JointConfig) -> List[Tuple[int, Point2, Tuple[str, ...]]]:
    """Точки пересечения окружностей (C, l2) и (D, l4): [(sign det A, p, flags)]."""
    cx, cy = g.l1 * math.cos(q.theta1), g.l1 * math.sin(q.theta1)
    dx, dy = g.l0 + g.l3 * math.cos(q.theta2), g.l3 * math.sin(q.theta2)
    dist = math.hypot(dx - cx, dy - cy)
    if dist <= tolerance("residual_rel") * g.max_length:
        return []

    along = (g.l2 * g.l2 - g.l4 * g.l4 + dist * dist) / (2.0 * dist)
    h2 = g.l2 * g.l2 - along * along
    tangent_eps = tolerance("tangent_rel") * g.l2 * g.l4
    if h2 < -tangent_eps:
        return []

    ux, uy = (dx - cx) / dist, (dy - cy) / dist
    # нормаль E·u; при ней det A = h·|CD| > 0
    nx, ny = -uy, ux
    base_x, base_y = cx + along * ux, cy + along * uy

    if abs(h2) <= tangent_eps:
        return [(0, Point2(x=base_x, y=base_y), (TANGENT,))]

    h = math.sqrt(h2)
    return [
        (sign, Point2(x=base_x + sign * h * nx, y=base_y + sign * h * ny), ())
        for sign in (1, -1)
    ]


def _full_config(g: Geometry, q: JointConfig, p: Point2, flags: Tuple[str, ...]) -> FullConfig:
    cx, cy = g.l1 * math.cos(q.theta1), g.l1 * math.sin(q.theta1)
    dx, dy = g.l0 + g.l3 * math.cos(q.theta2), g.l3 * math.sin(q.theta2)
    passive = PassiveAngles(
        theta3=math.atan2(p.y - cy, p.x - cx),
        theta4=math.atan2(p.y - dy, p.x - dx),
    )
    return FullConfig(geometry=g, q=q, passive=passive, p=p, flags=flags)


def forward_kinematics(g: Geometry, q: JointConfig, am: AssemblyMode) -> FullConfig:
    """Сборка с sign(det A) = am.sign; при касании: единственная точка с флагом Tangent."""
    solutions = _assemblies(g, q)
    if not solutions:
        raise NoAssembly(f"circles around C and D do not meet at q = ({q.theta1:.6g}, {q.theta2:.6g})")
    for sign, p, flags in solutions:
        if sign == 0 or sign == am.sign:
            return _full_config(g, q, p, flags)
    raise NoAssembly("requested assembly mode not found")  # недостижимо


def forward_all(g: Geometry, q: JointConfig) -> List[FullConfig]:
    """Все сборки: 0, 1 (касание) или 2, сначала sign(det A) = +1."""
    return [_full_config(g, q, p, flags) for _, p, flags in _assemblies(g, q)]


def closure_residual(cfg: FullConfig) -> float:
    return cfg.residual()
