"""Calibration report: summary text, fitted curves and the taxel-averaged curve."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .calibration import average_duplicates, taxel_series
from .core import CalibrationDataset, ExclusionReason, SkinModel
from .fileio import atomic_write_text, pa_to_kpa_text
from .fit import evaluate_polynomial, normalize_capacitance


def fitted_pressure(model: SkinModel, taxel: int, raw: float) -> float:
    """Raw polynomial prediction in Pa, no clamping of the result."""
    tm = model[taxel]
    return evaluate_polynomial(tm.coeffs, normalize_capacitance(raw, tm.c_min, tm.c_max))


def summary_text(model: SkinModel, dataset: CalibrationDataset) -> str:
    included = model.included
    rms = np.array([model.taxels[i].residual_rms for i in included])
    by_reason = {r: sum(1 for t in model.taxels if t.reason is r)
                 for r in ExclusionReason if r is not ExclusionReason.NONE}
    p = dataset.pressures
    lines = [
        f"taxels: {model.geometry.n_taxels}",
        f"fitted: {len(included)}",
        f"excluded: {len(model.excluded)}",
        *(f"  {r.value}: {n}" for r, n in by_reason.items()),
        f"excluded taxels: {' '.join(map(str, model.excluded)) or '-'}",
        f"samples: {len(dataset)}",
        f"pressure range kpa: {p.min() / 1e3:g} .. {p.max() / 1e3:g}" if len(p) else
        "pressure range kpa: -",
        f"residual rms kpa: median {np.median(rms) / 1e3:.4f} "
        f"mean {rms.mean() / 1e3:.4f} max {rms.max() / 1e3:.4f}",
        f"amplitude threshold counts: {model.amplitude_threshold}",
        f"activation threshold counts: {model.activation_threshold}",
        f"taxel area m2: {model.geometry.taxel_area!r}",
    ]
    return "\n".join(lines) + "\n"


def curves_csv(model: SkinModel, dataset: CalibrationDataset, bin_width: float) -> str:
    buf = io.StringIO()
    buf.write("taxel,pressure_kpa,raw,fitted_kpa\n")
    for i in model.included:
        for pt in average_duplicates(taxel_series(dataset, i), bin_width):
            fit = fitted_pressure(model, i, pt.mean_raw)
            buf.write(f"{i},{pa_to_kpa_text(pt.pressure)},{pt.mean_raw!r},"
                      f"{pa_to_kpa_text(fit)}\n")
    return buf.getvalue()


def average_curve(dataset: CalibrationDataset, model: SkinModel | None = None,
                  bin_width: float = 100.0) -> tuple[np.ndarray, np.ndarray]:
    """Mean raw count across taxels per pressure bin.

    With a model, only its included taxels are averaged.
    """
    cols = model.included if model is not None else list(range(dataset.geometry.n_taxels))
    mean_raw = dataset.counts[:, cols].mean(axis=1)
    pts = average_duplicates(list(zip(dataset.pressures.tolist(), mean_raw.tolist())),
                             bin_width)
    return np.array([p.pressure for p in pts]), np.array([p.mean_raw for p in pts])


def average_csv(dataset: CalibrationDataset, model: SkinModel, bin_width: float) -> str:
    p, raw = average_curve(dataset, model, bin_width)
    rows = [f"{pa_to_kpa_text(float(a))},{float(b)!r}" for a, b in zip(p, raw)]
    return "pressure_kpa,mean_raw\n" + "".join(r + "\n" for r in rows)


def plot_taxel(model: SkinModel, dataset: CalibrationDataset, taxel: int, path,
               bin_width: float) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    tm = model[taxel]
    pts = average_duplicates(taxel_series(dataset, taxel), bin_width)
    raw = np.linspace(tm.c_min, tm.c_max, 200)
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot([p.mean_raw for p in pts], [p.pressure / 1e3 for p in pts], ".", ms=3,
            label="averaged samples")
    ax.plot(raw, [fitted_pressure(model, taxel, r) / 1e3 for r in raw], "-",
            label="quintic fit")
    ax.set_xlabel("raw count")
    ax.set_ylabel("pressure [kPa]")
    ax.set_title(f"taxel {taxel}")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def write_report(model: SkinModel, dataset: CalibrationDataset, out_dir,
                 bin_width: float = 100.0, plots: bool = False) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "summary.txt": summary_text(model, dataset),
        "curves.csv": curves_csv(model, dataset, bin_width),
        "average.csv": average_csv(dataset, model, bin_width),
    }
    written = []
    for name, text in files.items():
        atomic_write_text(out / name, text)
        written.append(out / name)
    if plots:
        plot_dir = out / "plots"
        plot_dir.mkdir(exist_ok=True)
        for i in model.included:
            path = plot_dir / f"taxel_{i:03d}.svg"
            plot_taxel(model, dataset, i, path, bin_width)
            written.append(path)
    return written
