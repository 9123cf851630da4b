# tests/test_storage.py
import csv

import pytest

from app.calculators.atlas import build_atlas, enumerate_generalized_aspects
from app.errors import OutputError
from app.models import GridSpec, PlotStyle
from app.plots import render_atlas, svg_name
from app.storage import GRID_FILE, GRID_HEADER, REPORT_FILE, load_report, save_grid_csv, save_report


@pytest.fixture
def atlas(reference):
    return build_atlas(reference, GridSpec.default_for(reference, 16, 16), min_aspect_fraction=0.0)


@pytest.fixture
def report(reference, atlas):
    return enumerate_generalized_aspects(reference, atlas.grid, atlas=atlas, check_resolution=False)


def test_report_survives_save_and_load(report, tmp_path):
    path = save_report(report, tmp_path)
    assert path.name == REPORT_FILE
    assert load_report(path) == report


def test_report_is_byte_stable(report, tmp_path):
    a = save_report(report, tmp_path / "a").read_bytes()
    b = save_report(report, tmp_path / "b").read_bytes()
    assert a == b


def test_corrupt_report_is_an_io_error(tmp_path):
    path = tmp_path / REPORT_FILE
    path.write_text('{"total": 3}', encoding="utf-8")
    with pytest.raises(OutputError):
        load_report(path)


def test_grid_csv_has_one_row_per_cell_and_mode(atlas, tmp_path):
    path = save_grid_csv(atlas, tmp_path)
    assert path.name == GRID_FILE
    with path.open(encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == GRID_HEADER
    assert len(rows) == 1 + 16 * 16 * 4
    assert {r[2] for r in rows[1:]} == {"++", "+-", "-+", "--"}
    for x, y, mode, feasible, sign, label in rows[1:]:
        assert feasible in ("0", "1")
        assert sign in ("-1", "0", "1")
        if label:
            assert label.startswith(mode + ":")
            assert sign != "0"


def test_grid_csv_is_byte_stable(atlas, tmp_path):
    a = save_grid_csv(atlas, tmp_path / "a").read_bytes()
    b = save_grid_csv(atlas, tmp_path / "b").read_bytes()
    assert a == b
    assert b"\r\n" not in a


def test_output_dir_that_is_a_file(report, tmp_path):
    blocker = tmp_path / "out"
    blocker.write_text("", encoding="utf-8")
    with pytest.raises(OutputError):
        save_report(report, blocker)


def test_svg_per_mode(atlas, tmp_path):
    paths = render_atlas(atlas, PlotStyle.from_defaults(), tmp_path)
    assert sorted(p.name for p in paths) == sorted(svg_name(m) for m in ("++", "+-", "-+", "--"))
    assert svg_name("+-") == "mode_pm.svg"
    text = paths[0].read_text(encoding="utf-8")
    assert text.lstrip().startswith("<?xml")
    assert "y-up" in text


def test_svg_is_byte_stable(atlas, tmp_path):
    first = [p.read_bytes() for p in render_atlas(atlas, PlotStyle.from_defaults(), tmp_path / "a")]
    second = [p.read_bytes() for p in render_atlas(atlas, PlotStyle.from_defaults(), tmp_path / "b")]
    assert first == second
