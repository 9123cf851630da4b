# app/plots.py
"""SVG по каждому рабочему режиму: рабочая зона слева, пространство шарниров справа."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.colors import to_rgba
from matplotlib.figure import Figure
from matplotlib.patches import Patch

from app.calculators.atlas import Atlas, LabeledGrid, singularity_loci
from app.errors import OutputError
from app.models import PlotStyle
from app.storage import ensure_dir
from app.utils import PATTERN_ORDER

_DPI = 100
_MARGIN_PX = 80


def svg_name(mode_label: str) -> str:
    return "mode_" + mode_label.replace("+", "p").replace("-", "m") + ".svg"


def _palette(lg: LabeledGrid, style: PlotStyle) -> np.ndarray:
    return np.array([to_rgba(style.colors[a.pattern]) for a in lg.aspects] or [(0, 0, 0, 0)], dtype=float)


def _workspace_image(lg: LabeledGrid, palette: np.ndarray) -> np.ndarray:
    rgba = np.zeros(lg.labels.shape + (4,), dtype=float)
    mask = lg.labels >= 0
    rgba[mask] = palette[lg.labels[mask]]
    return rgba


def _joint_image(lg: LabeledGrid, palette: np.ndarray, bins: int) -> np.ndarray:
    rgba = np.zeros((bins, bins, 4), dtype=float)
    rows, cols = np.nonzero(lg.labels >= 0)
    if rows.size == 0:
        return rgba
    t1 = lg.field.theta1[rows, cols]
    t2 = lg.field.theta2[rows, cols]
    i1 = np.clip(((t1 + np.pi) / (2 * np.pi) * bins).astype(int), 0, bins - 1)
    i2 = np.clip(((t2 + np.pi) / (2 * np.pi) * bins).astype(int), 0, bins - 1)
    rgba[i2, i1] = palette[lg.labels[rows, cols]]
    return rgba


def render_mode(atlas: Atlas, mode_label: str, style: PlotStyle, path: Path) -> Path:
    g, grid = atlas.geometry, atlas.grid
    lg = atlas.layers[mode_label]
    palette = _palette(lg, style)

    ws_w = style.px_per_unit * (grid.x_range[1] - grid.x_range[0])
    ws_h = style.px_per_unit * (grid.y_range[1] - grid.y_range[0])
    jp = style.joint_panel_px
    width = ws_w + jp + 3 * _MARGIN_PX
    height = max(ws_h, jp) + 2 * _MARGIN_PX

    fig = Figure(figsize=(width / _DPI, height / _DPI), dpi=_DPI)
    ax_ws = fig.add_axes((_MARGIN_PX / width, _MARGIN_PX / height, ws_w / width, ws_h / height))
    ax_q = fig.add_axes(((2 * _MARGIN_PX + ws_w) / width, _MARGIN_PX / height, jp / width, jp / height))
    extent = (grid.x_range[0], grid.x_range[1], grid.y_range[0], grid.y_range[1])

    if g.has_workspace:
        ax_ws.imshow(_workspace_image(lg, palette), origin="lower", extent=extent, interpolation="nearest")
        loci = singularity_loci(g, grid, lg.mode, field=lg.field)
        for curve in loci.serial_curves:
            ax_ws.plot(curve[:, 0], curve[:, 1], color=style.serial_color, linewidth=0.8, linestyle="--")
        for curve in loci.parallel_curves:
            ax_ws.plot(curve[:, 0], curve[:, 1], color=style.boundary_color, linewidth=style.boundary_width)
        bins = max(16, jp // 2)
        ax_q.imshow(_joint_image(lg, palette, bins), origin="lower",
                    extent=(-np.pi, np.pi, -np.pi, np.pi), interpolation="nearest")

    # база A–B
    ax_ws.plot([0.0, g.l0], [0.0, 0.0], color="black", linewidth=1.5)
    ax_ws.plot([0.0, g.l0], [0.0, 0.0], "o", color="black", markersize=4)
    ax_ws.set_xlim(grid.x_range)
    ax_ws.set_ylim(grid.y_range)
    ax_ws.set_aspect("equal")
    ax_ws.set_xlabel("x")
    ax_ws.set_ylabel("y")
    ax_ws.set_title(f"Рабочий режим {mode_label}: рабочая зона")

    ax_q.set_xlim(-np.pi, np.pi)
    ax_q.set_ylim(-np.pi, np.pi)
    ax_q.set_aspect("equal")
    ax_q.set_xlabel("θ1")
    ax_q.set_ylabel("θ2")
    ax_q.set_title("Пространство шарниров")

    present = [p for p in PATTERN_ORDER if any(a.pattern == p for a in lg.aspects)]
    if present:
        ax_ws.legend(
            handles=[Patch(color=style.colors[p], label=f"det A {p[0]}, B11 {p[1]}, B22 {p[2]}") for p in present],
            loc="upper right",
            fontsize=8,
        )

    metadata = {
        "Date": None,
        "Title": f"five-bar working mode {mode_label}",
        "Description": f"y-up; 1 length unit = {style.px_per_unit:g} px",
    }
    try:
        with matplotlib.rc_context({"svg.hashsalt": f"fivebar-{mode_label}"}):
            fig.savefig(path, format="svg", metadata=metadata)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    logging.info(f"🖼 [PLOT] Сохранён {path}")
    return path


def render_atlas(atlas: Atlas, style: PlotStyle, out_dir: Path) -> List[Path]:
    out_dir = ensure_dir(Path(out_dir))
    return [render_mode(atlas, label, style, out_dir / svg_name(label)) for label in atlas.layers]
