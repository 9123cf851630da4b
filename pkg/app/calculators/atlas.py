# app/calculators/atlas.py
"""
Атлас рабочей зоны: сетка по (x, y) для каждого рабочего режима,
знак det A в ячейках, связные компоненты (обобщённые аспекты),
их проекции и линии особенностей.

В пределах одного режима ОЗК однозначна, поэтому ячейка (x, y)
вместе с режимом полностью задаёт конфигурацию.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.calculators.contours import circle_arcs, isolines
from app.calculators.kinematics import leg_ik_arrays
from app.calculators.singularity import all_working_modes, eps_a, eps_b
from app.errors import UnknownAspect
from app.models import (
    AspectId,
    AspectReport,
    AspectRow,
    AspectSummary,
    CellRecord,
    Geometry,
    GridSpec,
    JointConfig,
    Point2,
    WorkingMode,
)
from app.utils import PATTERN_ORDER, load_defaults, sign_letter

RESOLUTION_UNSTABLE = "ResolutionUnstable"


# ---------- Выборка ----------
@dataclass(frozen=True)
class WorkspaceField:
    """Поле ячеек одного режима. Массивы (ny, nx), строки по y, столбцы по x."""
    geometry: Geometry
    grid: GridSpec
    mode: WorkingMode
    feasible: np.ndarray
    sign: np.ndarray  # −1 / 0 (граница) / +1
    det_a: np.ndarray  # в центрах, nan вне зоны
    corner_det_a: np.ndarray  # в узлах (ny+1, nx+1), nan вне зоны и на B_jj ≈ 0
    theta1: np.ndarray
    theta2: np.ndarray

    def cell(self, row: int, col: int, label: Optional[str] = None) -> CellRecord:
        feasible = bool(self.feasible[row, col])
        q = JointConfig(theta1=float(self.theta1[row, col]), theta2=float(self.theta2[row, col])) if feasible else None
        return CellRecord(
            pose=Point2(x=float(self.grid.x_centers[col]), y=float(self.grid.y_centers[row])),
            mode=self.mode,
            feasible=feasible,
            det_a_sign=int(self.sign[row, col]),
            q=q,
            label=label,
        )

    def records(self) -> Iterator[CellRecord]:
        for row in range(self.grid.ny):
            for col in range(self.grid.nx):
                yield self.cell(row, col)


def _evaluate(g: Geometry, mode: WorkingMode, xs: np.ndarray, ys: np.ndarray,
              e_a: float, e_b: float, slack: Optional[float] = None) -> Dict[str, np.ndarray]:
    X, Y = np.meshgrid(xs, ys)
    s1, s2 = mode.signs
    t1, t3, ok1 = leg_ik_arrays((0.0, 0.0), g.l1, g.l2, X, Y, s1, slack)
    t2, t4, ok2 = leg_ik_arrays((g.l0, 0.0), g.l3, g.l4, X, Y, s2, slack)
    feasible = ok1 & ok2
    with np.errstate(invalid="ignore"):
        if g.theta1_range is not None:
            feasible &= (t1 >= g.theta1_range[0]) & (t1 <= g.theta1_range[1])
        if g.theta2_range is not None:
            feasible &= (t2 >= g.theta2_range[0]) & (t2 <= g.theta2_range[1])

        cx, cy = g.l1 * np.cos(t1), g.l1 * np.sin(t1)
        dx, dy = g.l0 + g.l3 * np.cos(t2), g.l3 * np.sin(t2)
        det = (X - cx) * (Y - dy) - (Y - cy) * (X - dx)
        b11 = g.l1 * g.l2 * np.sin(t3 - t1)
        b22 = g.l3 * g.l4 * np.sin(t4 - t2)
        mode_ok = feasible & (np.abs(b11) > e_b) & (np.abs(b22) > e_b)
        regular = mode_ok & (np.abs(det) > e_a)

    return {
        "feasible": feasible,
        "sign": np.where(regular, np.sign(det), 0).astype(np.int8),
        "det": np.where(mode_ok, det, np.nan),
        "theta1": np.where(feasible, t1, np.nan),
        "theta2": np.where(feasible, t2, np.nan),
    }


def _evaluate_banded(g: Geometry, mode: WorkingMode, xs: np.ndarray, ys: np.ndarray,
                     e_a: float, e_b: float, slack: Optional[float], workers: int) -> Dict[str, np.ndarray]:
    """Разбить строки на полосы; результат не зависит от числа потоков."""
    if workers <= 1 or len(ys) < 2 * workers:
        return _evaluate(g, mode, xs, ys, e_a, e_b, slack)
    bands = np.array_split(ys, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda band: _evaluate(g, mode, xs, band, e_a, e_b, slack), bands))
    return {key: np.concatenate([p[key] for p in parts], axis=0) for key in parts[0]}


def sample_workspace(
    g: Geometry,
    grid: GridSpec,
    mode: WorkingMode,
    *,
    eps_parallel: Optional[float] = None,
    eps_serial: Optional[float] = None,
    residual_tol: Optional[float] = None,
    workers: int = 1,
) -> WorkspaceField:
    """
    ОЗК в центрах и узлах ячеек. Ячейка получает знак только если центр регулярен
    и все четыре её угла регулярны с тем же знаком det A; иначе: граница (0).
    """
    e_a = eps_a(g) if eps_parallel is None else eps_parallel
    e_b = eps_b(g) if eps_serial is None else eps_serial
    centre = _evaluate_banded(g, mode, grid.x_centers, grid.y_centers, e_a, e_b, residual_tol, workers)
    corner = _evaluate_banded(g, mode, grid.x_edges, grid.y_edges, e_a, e_b, residual_tol, workers)

    sign = centre["sign"]
    cs = corner["sign"]
    for k in (cs[:-1, :-1], cs[:-1, 1:], cs[1:, :-1], cs[1:, 1:]):
        sign = np.where(k == sign, sign, 0).astype(np.int8)

    return WorkspaceField(
        geometry=g,
        grid=grid,
        mode=mode,
        feasible=centre["feasible"],
        sign=sign,
        det_a=centre["det"],
        corner_det_a=corner["det"],
        theta1=centre["theta1"],
        theta2=centre["theta2"],
    )


# ---------- Разметка компонент ----------
_OFFSETS = {
    4: ((-1, 0), (1, 0), (0, -1), (0, 1)),
    8: ((-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)),
}


@dataclass
class LabeledGrid:
    field: WorkspaceField
    labels: np.ndarray  # индекс в aspects, −1: без метки
    aspects: List[AspectId]
    sizes: List[int]
    fragments: int = 0
    fragment_cells: int = 0

    @property
    def mode(self) -> WorkingMode:
        return self.field.mode

    def index_of(self, aspect: AspectId) -> int:
        try:
            return self.aspects.index(aspect)
        except ValueError:
            raise UnknownAspect(f"aspect {aspect.key} not found in mode {self.mode.label}") from None

    def label_key(self, row: int, col: int) -> Optional[str]:
        k = int(self.labels[row, col])
        return self.aspects[k].key if k >= 0 else None

    def cell(self, row: int, col: int) -> CellRecord:
        return self.field.cell(row, col, label=self.label_key(row, col))


def label_aspects(field: WorkspaceField, connectivity: Optional[int] = None, min_cells: int = 1) -> LabeledGrid:
    """
    Обход в ширину по ячейкам одного знака det A. Нумерация плотная для каждого
    знака в порядке обхода строк. Компоненты меньше min_cells не становятся аспектами.
    """
    connectivity = connectivity or field.grid.connectivity
    offsets = _OFFSETS[connectivity]
    ny, nx = field.sign.shape
    signs = field.sign.ravel().tolist()
    seen = bytearray(ny * nx)
    components: List[Tuple[int, List[int]]] = []

    for start, s in enumerate(signs):
        if s == 0 or seen[start]:
            continue
        seen[start] = 1
        queue = deque([start])
        members: List[int] = []
        while queue:
            idx = queue.popleft()
            members.append(idx)
            r, c = divmod(idx, nx)
            for dr, dc in offsets:
                rr, cc = r + dr, c + dc
                if 0 <= rr < ny and 0 <= cc < nx:
                    k = rr * nx + cc
                    if not seen[k] and signs[k] == s:
                        seen[k] = 1
                        queue.append(k)
        components.append((s, members))

    labels = np.full(ny * nx, -1, dtype=np.int32)
    aspects: List[AspectId] = []
    sizes: List[int] = []
    per_sign = {1: 0, -1: 0}
    fragments = fragment_cells = 0
    for s, members in components:
        if len(members) < min_cells:
            fragments += 1
            fragment_cells += len(members)
            continue
        labels[np.asarray(members)] = len(aspects)
        aspects.append(AspectId(mode=field.mode, det_a_sign=s, component_index=per_sign[s]))
        sizes.append(len(members))
        per_sign[s] += 1

    return LabeledGrid(
        field=field,
        labels=labels.reshape(ny, nx),
        aspects=aspects,
        sizes=sizes,
        fragments=fragments,
        fragment_cells=fragment_cells,
    )


def audit_separation(lg: LabeledGrid) -> int:
    """Число 4-соседних пар размеченных ячеек с противоположным знаком det A."""
    s = np.where(lg.labels >= 0, lg.field.sign, 0).astype(np.int16)
    return int(np.count_nonzero(s[:, :-1] * s[:, 1:] < 0) + np.count_nonzero(s[:-1, :] * s[1:, :] < 0))


# ---------- Атлас по всем режимам ----------
@dataclass
class Atlas:
    geometry: Geometry
    grid: GridSpec
    layers: Dict[str, LabeledGrid] = dc_field(default_factory=dict)

    @property
    def aspects(self) -> List[AspectId]:
        return [a for lg in self.layers.values() for a in lg.aspects]

    @property
    def fragments(self) -> int:
        return sum(lg.fragments for lg in self.layers.values())

    def pattern_counts(self) -> Dict[str, int]:
        counts = {p: 0 for p in PATTERN_ORDER}
        for aspect in self.aspects:
            counts[aspect.pattern] += 1
        return counts


def build_atlas(
    g: Geometry,
    grid: GridSpec,
    modes: Optional[Sequence[WorkingMode]] = None,
    *,
    eps_parallel: Optional[float] = None,
    eps_serial: Optional[float] = None,
    residual_tol: Optional[float] = None,
    workers: int = 1,
    min_aspect_fraction: Optional[float] = None,
) -> Atlas:
    if min_aspect_fraction is None:
        min_aspect_fraction = float(load_defaults()["atlas"].get("min_aspect_fraction", 1e-3))
    atlas = Atlas(geometry=g, grid=grid)
    for mode in modes or all_working_modes():
        field = sample_workspace(g, grid, mode, eps_parallel=eps_parallel, eps_serial=eps_serial,
                                 residual_tol=residual_tol, workers=workers)
        regular = int(np.count_nonzero(field.sign))
        min_cells = max(1, math.ceil(min_aspect_fraction * regular))
        lg = label_aspects(field, grid.connectivity, min_cells=min_cells)
        atlas.layers[mode.label] = lg
        logging.info(
            f"🧭 [ATLAS] Режим {mode.label} ({grid.nx}x{grid.ny}): аспектов {len(lg.aspects)}, "
            f"фрагментов {lg.fragments} ({lg.fragment_cells} ячеек)"
        )
    return atlas


def _bbox(lg: LabeledGrid, k: int) -> Tuple[float, float, float, float]:
    rows, cols = np.nonzero(lg.labels == k)
    xe, ye = lg.field.grid.x_edges, lg.field.grid.y_edges
    return (float(xe[cols.min()]), float(ye[rows.min()]), float(xe[cols.max() + 1]), float(ye[rows.max() + 1]))


def summarize_atlas(atlas: Atlas, warnings: Sequence[str] = ()) -> AspectReport:
    counts = atlas.pattern_counts()
    rows = [AspectRow(detA=p[0], b11=p[1], b22=p[2], count=counts[p]) for p in PATTERN_ORDER]
    summaries = [
        AspectSummary(
            id=aspect.key,
            mode=label,
            sign=sign_letter(aspect.det_a_sign),
            cells=lg.sizes[k],
            bbox=_bbox(lg, k),
        )
        for label, lg in atlas.layers.items()
        for k, aspect in enumerate(lg.aspects)
    ]
    return AspectReport(
        geometry=atlas.geometry,
        grid=atlas.grid,
        rows=rows,
        total=sum(counts.values()),
        aspects=summaries,
        fragments=atlas.fragments,
        warnings=list(warnings),
    )


def enumerate_generalized_aspects(
    g: Geometry,
    grid: GridSpec,
    *,
    eps_parallel: Optional[float] = None,
    eps_serial: Optional[float] = None,
    residual_tol: Optional[float] = None,
    workers: int = 1,
    min_aspect_fraction: Optional[float] = None,
    check_resolution: Optional[bool] = None,
    atlas: Optional[Atlas] = None,
) -> AspectReport:
    """
    Таблица обобщённых аспектов по 8 знаковым шаблонам (det A, B11, B22).
    Предупреждения ResolutionUnstable: соседство ячеек разного знака
    или расхождение со счётом на сетке вдвое грубее.
    """
    opts = dict(eps_parallel=eps_parallel, eps_serial=eps_serial, residual_tol=residual_tol, workers=workers,
                min_aspect_fraction=min_aspect_fraction)
    if atlas is None:
        atlas = build_atlas(g, grid, **opts)
    if check_resolution is None:
        check_resolution = bool(load_defaults()["atlas"].get("check_resolution", True))

    warnings: List[str] = []
    for label, lg in atlas.layers.items():
        touching = audit_separation(lg)
        if touching:
            warnings.append(f"{RESOLUTION_UNSTABLE}: mode {label} has {touching} opposite-sign adjacent cell pairs")

    if check_resolution:
        coarse = grid.halved()
        coarse_counts = build_atlas(g, coarse, **opts).pattern_counts()
        fine_counts = atlas.pattern_counts()
        diff = [p for p in PATTERN_ORDER if coarse_counts[p] != fine_counts[p]]
        if diff:
            detail = ", ".join(f"{p} {fine_counts[p]} vs {coarse_counts[p]}" for p in diff)
            warnings.append(f"{RESOLUTION_UNSTABLE}: counts differ at {coarse.nx}x{coarse.ny}: {detail}")

    for w in warnings:
        logging.warning(f"⚠️ [ATLAS] {w}")
    report = summarize_atlas(atlas, warnings)
    logging.info(f"✅ [ATLAS] Всего обобщённых аспектов: {report.total}")
    return report


# ---------- Проекции ----------
def _layer(source: Union[LabeledGrid, Atlas], aspect: AspectId) -> LabeledGrid:
    if isinstance(source, Atlas):
        lg = source.layers.get(aspect.mode.label)
        if lg is None:
            raise UnknownAspect(f"mode {aspect.mode.label} is not part of this atlas")
        return lg
    if source.mode != aspect.mode:
        raise UnknownAspect(f"aspect {aspect.key} belongs to another working mode")
    return source


def project_to_workspace(source: Union[LabeledGrid, Atlas], aspect: AspectId) -> FrozenSet[Tuple[int, int]]:
    """Параллельный аспект: ячейки (row, col) с меткой аспекта."""
    lg = _layer(source, aspect)
    rows, cols = np.nonzero(lg.labels == lg.index_of(aspect))
    return frozenset(zip(rows.tolist(), cols.tolist()))


def project_to_jointspace(source: Union[LabeledGrid, Atlas], aspect: AspectId) -> List[Tuple[float, float]]:
    """Последовательный аспект: (θ1, θ2) ячеек аспекта, на торе (−π, π]²."""
    lg = _layer(source, aspect)
    rows, cols = np.nonzero(lg.labels == lg.index_of(aspect))
    t1 = lg.field.theta1[rows, cols]
    t2 = lg.field.theta2[rows, cols]
    return list(zip(t1.tolist(), t2.tolist()))


# ---------- Линии особенностей ----------
@dataclass
class SingularityLoci:
    parallel_curves: List[np.ndarray]
    serial_curves: List[np.ndarray]


def serial_circles(g: Geometry) -> List[Tuple[Tuple[float, float], float]]:
    """Вытянутая и сложенная нога: окружности вокруг A и B."""
    return [
        ((0.0, 0.0), g.l1 + g.l2),
        ((0.0, 0.0), abs(g.l1 - g.l2)),
        ((g.l0, 0.0), g.l3 + g.l4),
        ((g.l0, 0.0), abs(g.l3 - g.l4)),
    ]


def singularity_loci(
    g: Geometry,
    grid: GridSpec,
    mode: WorkingMode,
    *,
    field: Optional[WorkspaceField] = None,
    eps_parallel: Optional[float] = None,
    eps_serial: Optional[float] = None,
) -> SingularityLoci:
    if field is None:
        field = sample_workspace(g, grid, mode, eps_parallel=eps_parallel, eps_serial=eps_serial)
    parallel = isolines(field.corner_det_a, grid.x_edges, grid.y_edges, centre=field.det_a)
    serial = [
        arc
        for centre, radius in serial_circles(g)
        for arc in circle_arcs(centre, radius, grid.x_range, grid.y_range)
    ]
    return SingularityLoci(parallel_curves=parallel, serial_curves=serial)
