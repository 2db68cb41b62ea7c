import csv

import numpy as np

from conftest import PAPER_SWEEP
from skincal import fileio
from skincal.calibration import calibrate
from skincal.core import make_geometry
from skincal.fit import build_regressor
from skincal.report import write_report
from skincal.sim import default_skin, generate_sweep


def test_report_files(tmp_path, default_run):
    _, ds, model = default_run
    written = write_report(model, ds, tmp_path / "rep")
    names = sorted(p.name for p in written)
    assert names == ["average.csv", "curves.csv", "summary.txt"]
    summary = (tmp_path / "rep" / "summary.txt").read_text()
    assert f"fitted: {len(model.included)}" in summary
    assert f"excluded: {len(model.excluded)}" in summary
    assert "amplitude threshold counts: 10" in summary


def test_curves_reevaluated_from_model_file(tmp_path, default_run):
    _, ds, model = default_run
    write_report(model, ds, tmp_path / "rep")
    fileio.write_model_file(model, tmp_path / "m.txt")
    reloaded = fileio.load_model_file(tmp_path / "m.txt")
    with open(tmp_path / "rep" / "curves.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {int(r["taxel"]) for r in rows} == set(model.included)
    for r in rows[::7]:
        tm = reloaded.taxels[int(r["taxel"])]
        raw = float(r["raw"])
        c = min(max(2.0 * (raw - tm.c_min) / (tm.c_max - tm.c_min) - 1.0, -1.0), 1.0)
        pa = float(build_regressor(c) @ np.array(tm.coeffs))
        assert fileio.pa_to_kpa_text(pa) == r["fitted_kpa"]


def test_average_curve_file(tmp_path, default_run):
    _, ds, model = default_run
    write_report(model, ds, tmp_path / "rep")
    with open(tmp_path / "rep" / "average.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 71
    raw = [float(r["mean_raw"]) for r in rows]
    assert raw[-1] > raw[0]


def test_svg_plots(tmp_path):
    skin = default_skin(seed=2, geometry=make_geometry(1, 6), dead_fraction=0.2)
    ds = generate_sweep(skin, PAPER_SWEEP)
    model = calibrate(ds)
    written = write_report(model, ds, tmp_path / "rep", plots=True)
    svgs = [p for p in written if p.suffix == ".svg"]
    assert len(svgs) == len(model.included)
    assert svgs[0].read_text().lstrip().startswith("<?xml")
