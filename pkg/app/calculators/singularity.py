# app/calculators/singularity.py
"""
Матрицы A ṗ = B θ̇, классификация особенностей и рабочих режимов.

A = [(p − c)ᵀ; (p − d)ᵀ],  B = diag(l1·l2·sin(θ3 − θ1), l3·l4·sin(θ4 − θ2)).
"""
from __future__ import annotations

import itertools
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.errors import ModeBoundary, SingularSolve
from app.models import FullConfig, Geometry, KinematicMatrices, Matrix2, Point2, SingularityClass, WorkingMode
from app.utils import cross2, tolerance


# ---------- Пороги ----------
def eps_a(g: Geometry) -> float:
    return tolerance("det_rel") * g.l2 * g.l4


def eps_b(g: Geometry) -> float:
    return tolerance("det_rel") * max(g.l1 * g.l2, g.l3 * g.l4)


# ---------- Матрицы ----------
def direct_matrix(p: Point2, c: Point2, d: Point2) -> Matrix2:
    return ((p.x - c.x, p.y - c.y), (p.x - d.x, p.y - d.y))


def matrices(cfg: FullConfig) -> KinematicMatrices:
    g, q, pa = cfg.geometry, cfg.q, cfg.passive
    b11 = g.l1 * g.l2 * math.sin(pa.theta3 - q.theta1)
    b22 = g.l3 * g.l4 * math.sin(pa.theta4 - q.theta2)
    return KinematicMatrices(a=direct_matrix(cfg.p, cfg.c, cfg.d), b=((b11, 0.0), (0.0, b22)))


def det_a(cfg: FullConfig) -> float:
    (ax, ay), (bx, by) = matrices(cfg).a
    return cross2(ax, ay, bx, by)


def det_b(cfg: FullConfig) -> float:
    b = matrices(cfg).b
    return b[0][0] * b[1][1]


def classify_singularity(
    cfg: FullConfig, eps_parallel: Optional[float] = None, eps_serial: Optional[float] = None
) -> SingularityClass:
    """
    Parallel: C, D, P на одной прямой (|det A| ≤ ε_A).
    Serial: вытянута или сложена хотя бы одна нога (|B_jj| ≤ ε_B).
    Ровно на пороге: считаем особым.
    """
    g = cfg.geometry
    ea = eps_a(g) if eps_parallel is None else eps_parallel
    eb = eps_b(g) if eps_serial is None else eps_serial
    m = matrices(cfg)
    parallel = abs(det_a(cfg)) <= ea
    serial = abs(m.b[0][0]) <= eb or abs(m.b[1][1]) <= eb
    if parallel and serial:
        return SingularityClass.BOTH
    if parallel:
        return SingularityClass.PARALLEL
    if serial:
        return SingularityClass.SERIAL
    return SingularityClass.REGULAR


def working_mode_of(cfg: FullConfig, eps: Optional[float] = None) -> WorkingMode:
    eb = eps_b(cfg.geometry) if eps is None else eps
    b = matrices(cfg).b
    b11, b22 = b[0][0], b[1][1]
    if abs(b11) <= eb or abs(b22) <= eb:
        raise ModeBoundary(f"B11 = {b11:.3e}, B22 = {b22:.3e}")
    return WorkingMode(signs=(1 if b11 > 0 else -1, 1 if b22 > 0 else -1))


# ---------- Скорости ----------
def solve_velocity(cfg: FullConfig, q_dot: Sequence[float], eps: Optional[float] = None) -> np.ndarray:
    """ṗ = A⁻¹ B θ̇."""
    m = matrices(cfg)
    if abs(det_a(cfg)) <= (eps_a(cfg.geometry) if eps is None else eps):
        raise SingularSolve("A", "parallel singularity: direct kinematics matrix A is singular")
    return np.linalg.solve(m.a_array, m.b_array @ np.asarray(q_dot, dtype=float))


def solve_rates(cfg: FullConfig, p_dot: Sequence[float], eps: Optional[float] = None) -> np.ndarray:
    """θ̇ = B⁻¹ A ṗ; B диагональна, делим поэлементно."""
    m = matrices(cfg)
    eb = eps_b(cfg.geometry) if eps is None else eps
    diag = np.array([m.b[0][0], m.b[1][1]])
    if np.any(np.abs(diag) <= eb):
        raise SingularSolve("B", "serial singularity: inverse kinematics matrix B is singular")
    return (m.a_array @ np.asarray(p_dot, dtype=float)) / diag


def twist_residual(cfg: FullConfig, p_dot: Sequence[float], q_dot: Sequence[float]) -> float:
    """‖A ṗ − B θ̇‖."""
    m = matrices(cfg)
    return float(np.linalg.norm(m.a_array @ np.asarray(p_dot, float) - m.b_array @ np.asarray(q_dot, float)))


# ---------- Комбинаторика режимов ----------
def enumerate_working_modes(postures_per_leg: Sequence[int]) -> Tuple[int, List[Tuple[int, ...]]]:
    """
    Число рабочих режимов и их векторы индексов поз (лексикографически).
    Для двух поз на ногу индекс 0: это знак '+', 1: '−'.
    """
    counts = [int(n) for n in postures_per_leg]
    if not counts:
        raise ValueError("need at least one leg")
    if any(n < 1 for n in counts):
        raise ValueError("every leg needs at least one posture")
    vectors = list(itertools.product(*(range(n) for n in counts)))
    return math.prod(counts), vectors


def all_working_modes(legs: int = 2) -> List[WorkingMode]:
    """++, +−, −+, −− для пятизвенника."""
    _, vectors = enumerate_working_modes([2] * legs)
    return [WorkingMode(signs=tuple(1 if i == 0 else -1 for i in v)) for v in vectors]
