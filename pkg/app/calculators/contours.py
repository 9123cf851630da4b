# app/calculators/contours.py
"""Изолинии на сетке (marching squares) и дуги окружностей, обрезанные прямоугольником."""
from __future__ import annotations

import math
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

EdgeKey = Tuple[str, int, int]

# углы ячейки: 0 = (i, j), 1 = (i, j+1), 2 = (i+1, j+1), 3 = (i+1, j)
_EDGES = {
    (0, 1): lambda i, j: ("h", i, j),
    (1, 2): lambda i, j: ("v", i, j + 1),
    (3, 2): lambda i, j: ("h", i + 1, j),
    (0, 3): lambda i, j: ("v", i, j),
}


def _segments_for_case(above: Sequence[bool], centre_above: bool) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    crossing = [edge for edge in _EDGES if above[edge[0]] != above[edge[1]]]
    if len(crossing) == 2:
        return [(crossing[0], crossing[1])]
    if len(crossing) != 4:
        return []
    # седло: центр решает, какая диагональ связна
    if centre_above == above[0]:
        return [((0, 1), (1, 2)), ((3, 2), (0, 3))]
    return [((0, 1), (0, 3)), ((1, 2), (3, 2))]


def isolines(
    values: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    centre: Optional[np.ndarray] = None,
    level: float = 0.0,
) -> List[np.ndarray]:
    """
    Линии уровня поля values[i, j], заданного в узлах (xs[j], ys[i]).
    Ячейки с nan в любом углу пропускаются. Возвращает полилинии (k, 2),
    замкнутые повторяют первую точку в конце.
    """
    ny, nx = values.shape[0] - 1, values.shape[1] - 1
    above = values > level
    valid = ~np.isnan(values)
    case = (
        above[:-1, :-1].astype(np.int8)
        + 2 * above[:-1, 1:]
        + 4 * above[1:, 1:]
        + 8 * above[1:, :-1]
    )
    cell_ok = valid[:-1, :-1] & valid[:-1, 1:] & valid[1:, 1:] & valid[1:, :-1]
    active = cell_ok & (case != 0) & (case != 15)

    points: Dict[EdgeKey, Tuple[float, float]] = {}
    neighbours: Dict[EdgeKey, List[EdgeKey]] = defaultdict(list)

    for i, j in zip(*np.nonzero(active)):
        i, j = int(i), int(j)
        corner_xy = [(xs[j], ys[i]), (xs[j + 1], ys[i]), (xs[j + 1], ys[i + 1]), (xs[j], ys[i + 1])]
        corner_v = [values[i, j], values[i, j + 1], values[i + 1, j + 1], values[i + 1, j]]
        corner_above = [v > level for v in corner_v]
        if centre is not None and not math.isnan(centre[i, j]):
            centre_above = bool(centre[i, j] > level)
        else:
            centre_above = bool(np.mean(corner_v) > level)

        for e0, e1 in _segments_for_case(corner_above, centre_above):
            keys = []
            for a, b in (e0, e1):
                key = _EDGES[(a, b)](i, j)
                if key not in points:
                    t = (level - corner_v[a]) / (corner_v[b] - corner_v[a])
                    t = min(1.0, max(0.0, t))
                    (xa, ya), (xb, yb) = corner_xy[a], corner_xy[b]
                    points[key] = (float(xa + t * (xb - xa)), float(ya + t * (yb - ya)))
                keys.append(key)
            neighbours[keys[0]].append(keys[1])
            neighbours[keys[1]].append(keys[0])

    return [np.array([points[k] for k in chain]) for chain in _join(neighbours)]


def _join(neighbours: Dict[EdgeKey, List[EdgeKey]]) -> List[List[EdgeKey]]:
    """Склеить отрезки в цепочки: сначала открытые (от концов), потом циклы."""
    used: set = set()
    chains: List[List[EdgeKey]] = []

    def walk(start: EdgeKey) -> List[EdgeKey]:
        chain, prev, cur = [start], None, start
        while True:
            nxt = None
            for cand in sorted(neighbours[cur]):
                edge = (min(cur, cand), max(cur, cand))
                if cand != prev and edge not in used:
                    nxt = cand
                    used.add(edge)
                    break
            if nxt is None:
                return chain
            chain.append(nxt)
            prev, cur = cur, nxt
            if cur == start:
                return chain

    for key in sorted(k for k, v in neighbours.items() if len(v) == 1):
        if not any((min(key, n), max(key, n)) in used for n in neighbours[key]):
            chains.append(walk(key))
    for key in sorted(neighbours):
        if any((min(key, n), max(key, n)) not in used for n in neighbours[key]):
            chains.append(walk(key))
    return chains


# ---------- Окружности ----------
def circle_arcs(
    centre: Tuple[float, float],
    radius: float,
    x_range: Tuple[float, float],
    y_range: Tuple[float, float],
    samples: int = 361,
) -> List[np.ndarray]:
    """Окружность как полилинии, оставляя только части внутри прямоугольника."""
    if radius <= 0:
        return []
    t = np.linspace(0.0, 2.0 * np.pi, samples)
    xy = np.column_stack([centre[0] + radius * np.cos(t), centre[1] + radius * np.sin(t)])
    inside = (
        (xy[:, 0] >= x_range[0]) & (xy[:, 0] <= x_range[1])
        & (xy[:, 1] >= y_range[0]) & (xy[:, 1] <= y_range[1])
    )
    if inside.all():
        return [xy]

    runs: List[np.ndarray] = []
    start = None
    for k, flag in enumerate(inside):
        if flag and start is None:
            start = k
        if not flag and start is not None:
            runs.append(xy[start:k])
            start = None
    if start is not None:
        runs.append(xy[start:])
    # t = 0 и t = 2π: одна точка: склеиваем дугу через неё
    if len(runs) > 1 and inside[0] and inside[-1]:
        runs = [np.vstack([runs[-1], runs[0][1:]])] + runs[1:-1]
    return [r for r in runs if len(r) >= 2]
