# app/handlers/atlas.py
import argparse
import logging
from pathlib import Path
from typing import List

from app.calculators.atlas import build_atlas, enumerate_generalized_aspects
from app.config import LENGTH_KEYS, add_geometry_arguments, default_run_config, load_config, validated
from app.errors import ConfigValidationError
from app.handlers.common import EXIT_OK, emit
from app.models import Geometry, GridSpec, PlotStyle, RunConfig
from app.plots import render_atlas
from app.storage import save_grid_csv, save_report


def _formats(text: str) -> List[str]:
    items = [x.strip().lower() for x in text.split(",") if x.strip()]
    bad = [x for x in items if x not in ("json", "csv", "svg")]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"formats must be a comma list over json,csv,svg; got {text!r}")
    return items


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """Файл конфигурации (или значения по умолчанию) плюс переопределения из флагов."""
    cfg = load_config(args.config) if args.config else default_run_config()
    update = {}

    lengths = {k: getattr(args, k) for k in LENGTH_KEYS if getattr(args, k, None) is not None}
    geometry = cfg.geometry
    if lengths:
        try:
            geometry = Geometry(**{**cfg.geometry.model_dump(), **lengths})
        except ValueError as e:
            raise ConfigValidationError(next(iter(lengths)), str(e)) from None
        update["geometry"] = geometry

    if lengths or args.nx or args.ny:
        nx = args.nx or cfg.grid.nx
        ny = args.ny or cfg.grid.ny
        # прямоугольник, заданный в файле явно, не пересчитываем
        derived = cfg.grid == GridSpec.default_for(cfg.geometry, cfg.grid.nx, cfg.grid.ny, cfg.grid.connectivity)
        try:
            if lengths and derived:
                grid = GridSpec.default_for(geometry, nx, ny, cfg.grid.connectivity)
            else:
                if lengths:
                    logging.warning(
                        f"⚠️ [ATLAS] Длины звеньев заменены, но диапазоны сетки x {cfg.grid.x_range}, "
                        f"y {cfg.grid.y_range} взяты из конфигурации без изменений"
                    )
                grid = GridSpec(**{**cfg.grid.model_dump(), "nx": nx, "ny": ny})
        except ValueError as e:
            raise ConfigValidationError("nx" if args.nx else "ny", str(e)) from None
        update["grid"] = grid

    if args.workers:
        update["workers"] = args.workers
    if args.output_dir:
        update["output_dir"] = args.output_dir
    if args.formats:
        update["formats"] = tuple(args.formats)
    if args.no_resolution_check:
        update["check_resolution"] = False
    if not update:
        return cfg
    return validated(lambda: RunConfig.model_validate({**cfg.model_dump(), **update}))


def cmd_atlas(args: argparse.Namespace) -> int:
    cfg = run_config_from_args(args)
    g, grid = cfg.geometry, cfg.grid
    logging.info(
        f"🚀 [ATLAS] l = ({g.l0:g}, {g.l1:g}, {g.l2:g}, {g.l3:g}, {g.l4:g}), сетка {grid.nx}x{grid.ny}, "
        f"потоков {cfg.workers}"
    )
    if not g.has_workspace:
        logging.warning("⚠️ [ATLAS] Кольца досягаемости ног не пересекаются: рабочая зона пуста")

    opts = dict(
        eps_parallel=cfg.eps_a,
        eps_serial=cfg.eps_b,
        residual_tol=cfg.residual_tol,
        workers=cfg.workers,
        min_aspect_fraction=cfg.min_aspect_fraction,
    )
    atlas = build_atlas(g, grid, **opts)
    report = enumerate_generalized_aspects(g, grid, atlas=atlas, check_resolution=cfg.check_resolution, **opts)

    out_dir = Path(cfg.output_dir)
    files: List[Path] = []
    if "json" in cfg.formats:
        files.append(save_report(report, out_dir))
    if "csv" in cfg.formats:
        files.append(save_grid_csv(atlas, out_dir))
    if "svg" in cfg.formats:
        files.extend(render_atlas(atlas, PlotStyle.from_defaults(), out_dir))

    emit({
        "ok": True,
        "total": report.total,
        "rows": [r.model_dump() for r in report.rows],
        "fragments": report.fragments,
        "warnings": report.warnings,
        "files": [str(p) for p in files],
    })
    return EXIT_OK


def build_atlas_handlers(subparsers) -> None:
    p = subparsers.add_parser("atlas", help="enumerate generalized aspects and write report/grid/plots")
    add_geometry_arguments(p)
    p.add_argument("--nx", type=int, help="cells along x")
    p.add_argument("--ny", type=int, help="cells along y")
    p.add_argument("--workers", type=int, help="sampling threads")
    p.add_argument("--output-dir", type=Path)
    p.add_argument("--formats", type=_formats, help="comma list over json,csv,svg")
    p.add_argument("--no-resolution-check", action="store_true", help="skip the half-resolution recount")
    p.set_defaults(handler=cmd_atlas)
