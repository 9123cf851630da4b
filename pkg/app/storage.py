# app/storage.py
import csv
import logging
from pathlib import Path

from pydantic import ValidationError

from app.calculators.atlas import Atlas
from app.errors import OutputError
from app.models import AspectReport

# ---------- Пути и файлы ----------
REPORT_FILE = "report.json"
GRID_FILE = "grid.csv"
GRID_HEADER = ["x", "y", "mode", "feasible", "detA_sign", "label"]


def ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create output directory {path}: {e}") from e
    return path


# ---------- Отчёт ----------
def save_report(report: AspectReport, out_dir: Path) -> Path:
    path = ensure_dir(Path(out_dir)) / REPORT_FILE
    try:
        path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    logging.info(f"💾 [IO] Отчёт сохранён: {path}")
    return path


def load_report(path: Path) -> AspectReport:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot read {path}: {e}") from e
    try:
        return AspectReport.model_validate_json(text)
    except ValidationError as e:
        raise OutputError(f"{path} is not a valid aspect report: {e.errors()[0]['msg']}") from e


# ---------- Сетка ----------
def save_grid_csv(atlas: Atlas, out_dir: Path) -> Path:
    """Одна строка на ячейку и режим; строки по y, внутри: по x."""
    path = ensure_dir(Path(out_dir)) / GRID_FILE
    xs = [repr(float(x)) for x in atlas.grid.x_centers]
    ys = [repr(float(y)) for y in atlas.grid.y_centers]
    rows = 0
    try:
        with path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(GRID_HEADER)
            for mode_label, lg in atlas.layers.items():
                keys = [a.key for a in lg.aspects]
                feasible = lg.field.feasible.astype(int).tolist()
                sign = lg.field.sign.tolist()
                labels = lg.labels.tolist()
                for r, y in enumerate(ys):
                    for c, x in enumerate(xs):
                        k = labels[r][c]
                        writer.writerow([x, y, mode_label, feasible[r][c], sign[r][c], keys[k] if k >= 0 else ""])
                        rows += 1
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    logging.info(f"💾 [IO] Сетка сохранена: {path} ({rows} строк)")
    return path
