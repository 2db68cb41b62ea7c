"""File formats: sweep and frame CSVs, model files, simulator sidecars, configs.

Pressures are written in kPa and converted to Pa exactly once, on read.
Model files and sidecars are a ``key = value`` header followed by a
``[taxels]`` CSV table closed by an ``[end]`` line. Floats are written with
``repr`` so that every value reads back bit-for-bit.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .core import (
    ADC_MAX,
    N_COEFFS,
    BaselineFrame,
    CalibrationDataset,
    CalibrationSample,
    CapacitanceFrame,
    ExclusionReason,
    SkinGeometry,
    SkinModel,
    TaxelModel,
)
from .errors import DatasetError, FormatError, IncompatibleModelError, ProtocolError
from .sim import GroundTruthTaxel, SimSkin

MODEL_FORMAT = "skincal-model"
MODEL_VERSION = 1
TRUTH_FORMAT = "skincal-ground-truth"
TRUTH_VERSION = 1
TABLE_MARKER = "[taxels]"
END_MARKER = "[end]"
COEFF_NAMES = ("a", "b", "c", "d", "e", "f")


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temp file beside ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def pa_to_kpa_text(pa: float) -> str:
    """Shortest kPa string that parses back to exactly ``pa``."""
    text = repr(pa / 1000.0)
    if kpa_text_to_pa(text) == pa:
        return text
    exact = Decimal(pa).scaleb(-3).normalize()
    return format(exact, "f")


def kpa_text_to_pa(text: str) -> float:
    return float(Decimal(text.strip()).scaleb(3))


def _parse_count(text: str, row: int, col: str) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        raise DatasetError(f"row {row}, column {col}: {text!r} is not an integer") from None
    if not 0 <= value <= ADC_MAX:
        raise DatasetError(f"row {row}, column {col}: count {value} outside [0, {ADC_MAX}]")
    return value


def _count_header(n: int) -> list[str]:
    return [f"c_{i}" for i in range(n)]


def _check_count_columns(cols: Sequence[str], path) -> int:
    n = len(cols)
    if n == 0 or list(cols) != _count_header(n):
        raise FormatError(f"{path}: expected count columns c_0..c_{{N-1}}")
    return n


def geometry_for(n_taxels: int, geometry: Optional[SkinGeometry]) -> SkinGeometry:
    if geometry is None:
        return SkinGeometry(1, n_taxels)
    if geometry.n_taxels != n_taxels:
        raise FormatError(f"file has {n_taxels} taxels, geometry expects {geometry.n_taxels}")
    return geometry


# -- sweeps and frames ------------------------------------------------------

def write_sweep_csv(dataset: CalibrationDataset, path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pressure_kpa", *_count_header(dataset.geometry.n_taxels)])
    for s in dataset.samples:
        w.writerow([pa_to_kpa_text(s.pressure), *s.frame])
    atomic_write_text(path, buf.getvalue())


def parse_sweep_csv(path, geometry: Optional[SkinGeometry] = None) -> CalibrationDataset:
    """Read a ``pressure_kpa,c_0,...`` sweep.

    Without ``geometry`` the taxels are treated as one strip of unit layout
    with the default taxel area.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0].strip() != "pressure_kpa":
        raise FormatError(f"{path}: missing 'pressure_kpa,c_0,...' header")
    header = [h.strip() for h in rows[0]]
    n = _check_count_columns(header[1:], path)
    samples = []
    prev = None
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != n + 1:
            raise FormatError(f"{path}: row {r} has {len(row)} fields, expected {n + 1}")
        try:
            pressure = kpa_text_to_pa(row[0])
        except Exception:
            raise DatasetError(f"row {r}, column pressure_kpa: {row[0]!r} is not a number") from None
        if prev is not None and pressure < prev:
            raise ProtocolError(f"row {r}: pressure decreases ({row[0].strip()} kPa)")
        prev = pressure
        frame = tuple(_parse_count(v, r, header[j + 1]) for j, v in enumerate(row[1:]))
        try:
            samples.append(CalibrationSample(pressure, frame))
        except DatasetError as exc:
            raise DatasetError(f"row {r}: {exc}") from None
    if geometry is None and not samples and n == 0:
        raise FormatError(f"{path}: no taxel columns")
    return CalibrationDataset(geometry_for(n, geometry), tuple(samples))


def write_frames_csv(frames: Iterable[CapacitanceFrame], path) -> None:
    frames = list(frames)
    if not frames:
        raise ValueError("no frames to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_count_header(len(frames[0])))
    for f in frames:
        w.writerow(f.counts)
    atomic_write_text(path, buf.getvalue())


def parse_frames_csv(path) -> list[CapacitanceFrame]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    n = _check_count_columns(header, path)
    frames = []
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != n:
            raise FormatError(f"{path}: row {r} has {len(row)} fields, expected {n}")
        frames.append(CapacitanceFrame(tuple(_parse_count(v, r, header[j])
                                             for j, v in enumerate(row))))
    return frames


def write_baseline(baseline: BaselineFrame, path) -> None:
    write_frames_csv([baseline], path)


def load_baseline(path) -> BaselineFrame:
    frames = parse_frames_csv(path)
    if len(frames) != 1:
        raise FormatError(f"{path}: a baseline file holds exactly one frame, found {len(frames)}")
    return BaselineFrame(frames[0].counts)


# -- key/value header files ---------------------------------------------------

def parse_key_values(lines: Iterable[str], source="config") -> dict[str, str]:
    out = {}
    for n, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"{source}: line {n}: expected 'key = value'")
        out[key.strip()] = value.strip()
    return out


def load_config(path) -> dict[str, str]:
    with open(path) as fh:
        return parse_key_values(fh, path)


def _split_table(path) -> tuple[dict[str, str], list[list[str]]]:
    with open(path, newline="") as fh:
        text = fh.read()
    head, sep, table = text.partition(TABLE_MARKER + "\n")
    if not sep:
        raise FormatError(f"{path}: missing {TABLE_MARKER} section")
    table, sep, _ = table.partition(END_MARKER + "\n")
    if not sep:
        raise FormatError(f"{path}: truncated, no {END_MARKER} line")
    meta = parse_key_values(head.splitlines(), path)
    rows = [r for r in csv.reader(io.StringIO(table)) if r]
    if not rows:
        raise FormatError(f"{path}: empty taxel table")
    return meta, rows


def _require(meta: dict[str, str], key: str, path, conv=str):
    if key not in meta:
        raise FormatError(f"{path}: header field {key!r} missing")
    try:
        return conv(meta[key])
    except ValueError:
        raise FormatError(f"{path}: header field {key!r} has bad value {meta[key]!r}") from None


def _check_version(meta, path, fmt: str, version: int) -> None:
    if _require(meta, "format", path) != fmt:
        raise FormatError(f"{path}: not a {fmt} file")
    found = _require(meta, "format_version", path, int)
    if found != version:
        raise IncompatibleModelError(f"{path}: format version {found}, expected {version}")


def _geometry_lines(g: SkinGeometry) -> list[str]:
    return [f"n_taxels = {g.n_taxels}",
            f"n_triangles = {g.n_triangles}",
            f"taxels_per_triangle = {g.taxels_per_triangle}",
            f"taxel_area_m2 = {g.taxel_area!r}"]


def _read_geometry(meta, path) -> SkinGeometry:
    g = SkinGeometry(_require(meta, "n_triangles", path, int),
                     _require(meta, "taxels_per_triangle", path, int),
                     _require(meta, "taxel_area_m2", path, float))
    if _require(meta, "n_taxels", path, int) != g.n_taxels:
        raise FormatError(f"{path}: n_taxels disagrees with the triangle layout")
    return g


def _table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue() + END_MARKER + "\n"


# -- model files ------------------------------------------------------------

MODEL_COLUMNS = ("taxel", "excluded", "exclusion_reason", "c_min", "c_max",
                 *COEFF_NAMES, "residual_rms_pa")


def format_model(model: SkinModel, created: Optional[str] = None) -> str:
    if created is None:
        created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    head = ["# pressure coefficients are in Pa over capacitance normalized to [-1, 1]",
            f"format = {MODEL_FORMAT}",
            f"format_version = {MODEL_VERSION}",
            *_geometry_lines(model.geometry),
            f"activation_threshold = {model.activation_threshold}",
            f"amplitude_threshold = {model.amplitude_threshold}",
            f"created = {created}",
            TABLE_MARKER]
    rows = []
    for t in model.taxels:
        coeffs = [""] * N_COEFFS if t.excluded else [repr(c) for c in t.coeffs]
        rows.append([t.taxel, int(t.excluded), t.reason.value, t.c_min, t.c_max,
                     *coeffs, repr(t.residual_rms)])
    return "\n".join(head) + "\n" + _table(MODEL_COLUMNS, rows)


def write_model_file(model: SkinModel, path, created: Optional[str] = None) -> None:
    atomic_write_text(path, format_model(model, created))


def load_model_file(path) -> SkinModel:
    meta, rows = _split_table(path)
    _check_version(meta, path, MODEL_FORMAT, MODEL_VERSION)
    geometry = _read_geometry(meta, path)
    if tuple(rows[0]) != MODEL_COLUMNS:
        raise FormatError(f"{path}: unexpected model table columns")
    records = rows[1:]
    if len(records) != geometry.n_taxels:
        raise FormatError(f"{path}: {len(records)} taxel records, header says {geometry.n_taxels}")
    taxels = []
    for r, rec in enumerate(records):
        if len(rec) != len(MODEL_COLUMNS):
            raise FormatError(f"{path}: taxel record {r} is truncated")
        try:
            taxel, excluded, reason, c_min, c_max = (int(rec[0]), rec[1] == "1", rec[2],
                                                     int(rec[3]), int(rec[4]))
            coeffs = None if excluded else tuple(float(v) for v in rec[5:5 + N_COEFFS])
            reason = ExclusionReason(reason)
            if excluded != (reason is not ExclusionReason.NONE):
                raise ValueError("excluded flag disagrees with exclusion_reason")
            taxels.append(TaxelModel(taxel, c_min, c_max, coeffs,
                                     float(rec[-1]), reason))
        except ValueError as exc:
            raise FormatError(f"{path}: taxel record {r}: {exc}") from None
    try:
        return SkinModel(geometry, tuple(taxels),
                         _require(meta, "activation_threshold", path, int),
                         _require(meta, "amplitude_threshold", path, int))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


# -- simulator ground truth ---------------------------------------------------

TRUTH_COLUMNS = ("taxel", "stiffness_n_per_m", "permittivity_f_per_m", "rest_gap_m",
                 "compression_limit", "gain_counts_per_pf", "offset", "noise_sigma", "dead")


def write_ground_truth(skin: SimSkin, path) -> None:
    head = [f"format = {TRUTH_FORMAT}",
            f"format_version = {TRUTH_VERSION}",
            *_geometry_lines(skin.geometry),
            f"seed = {skin.rng_seed}",
            TABLE_MARKER]
    rows = [[i, repr(t.stiffness), repr(t.permittivity), repr(t.rest_gap),
             repr(t.compression_limit), repr(t.gain), t.offset, repr(t.noise_sigma),
             int(t.dead)] for i, t in enumerate(skin.taxels)]
    atomic_write_text(path, "\n".join(head) + "\n" + _table(TRUTH_COLUMNS, rows))


def load_ground_truth(path) -> SimSkin:
    meta, rows = _split_table(path)
    _check_version(meta, path, TRUTH_FORMAT, TRUTH_VERSION)
    geometry = _read_geometry(meta, path)
    if tuple(rows[0]) != TRUTH_COLUMNS or len(rows) - 1 != geometry.n_taxels:
        raise FormatError(f"{path}: malformed ground-truth table")
    try:
        taxels = tuple(
            GroundTruthTaxel(stiffness=float(r[1]), permittivity=float(r[2]),
                             rest_gap=float(r[3]), compression_limit=float(r[4]),
                             gain=float(r[5]), offset=int(r[6]), noise_sigma=float(r[7]),
                             dead=r[8] == "1")
            for r in rows[1:])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    return SimSkin(geometry, taxels, _require(meta, "seed", path, int))
