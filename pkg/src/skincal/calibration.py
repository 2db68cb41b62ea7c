"""Turn a uniform-pressure sweep into a per-taxel calibrated skin model."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .core import (
    N_COEFFS,
    CalibrationDataset,
    ExclusionReason,
    SkinModel,
    TaxelModel,
)
from .errors import EmptyDataError, EmptyModelError, InsufficientDataError, RankDeficientError
from .fit import fit_polynomial, normalize_capacitance

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CalibrationConfig:
    """Tunables of the calibration procedure.

    Attributes:
        amplitude_threshold: taxels whose sweep range c_max - c_min is below
            this many counts are excluded as insensitive.
        activation_threshold: minimum change from baseline, in counts, for a
            taxel to count as touched during force estimation.
        pressure_bin_width: samples whose pressures share a bin of this width
            (Pa) are averaged into one fit point.
        min_points: fewest averaged points a taxel needs to be fitted.
    """

    amplitude_threshold: int = 10
    activation_threshold: int = 3
    pressure_bin_width: float = 100.0
    min_points: int = N_COEFFS

    def __post_init__(self) -> None:
        if self.amplitude_threshold < 0:
            raise ValueError("amplitude_threshold must be >= 0")
        if self.activation_threshold < 0:
            raise ValueError("activation_threshold must be >= 0")
        if not self.pressure_bin_width > 0:
            raise ValueError("pressure_bin_width must be > 0")
        if self.min_points < N_COEFFS:
            raise ValueError(f"min_points must be >= {N_COEFFS}")


class AveragedPoint(NamedTuple):
    pressure: float
    mean_raw: float


def taxel_series(dataset: CalibrationDataset, taxel: int) -> list[tuple[float, int]]:
    """(pressure, raw) pairs of one taxel, in sample order."""
    taxel = dataset.geometry.check_taxel(taxel)
    return [(s.pressure, s.frame[taxel]) for s in dataset.samples]


def _bin_index(pressures: np.ndarray, bin_width: float) -> np.ndarray:
    return np.floor(pressures / bin_width).astype(np.int64)


def average_duplicates(series: Sequence[tuple[float, float]],
                       bin_width: float) -> list[AveragedPoint]:
    """Merge samples that fall in the same ``floor(P / bin_width)`` bin.

    Each output point is the mean pressure and mean raw count of its bin,
    sorted by pressure.
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be > 0")
    if len(series) == 0:
        return []
    arr = np.asarray(series, dtype=float).reshape(-1, 2)
    bins = _bin_index(arr[:, 0], bin_width)
    uniq, inverse, sizes = np.unique(bins, return_inverse=True, return_counts=True)
    p_sum = np.bincount(inverse, weights=arr[:, 0])
    c_sum = np.bincount(inverse, weights=arr[:, 1])
    return [AveragedPoint(float(p), float(c))
            for p, c in zip(p_sum / sizes, c_sum / sizes)]


def amplitude(series: Sequence[tuple[float, int]]) -> tuple[int, int]:
    if len(series) == 0:
        raise EmptyDataError("cannot take the amplitude of an empty series")
    raw = [r for _, r in series]
    return int(min(raw)), int(max(raw))


def calibrate_taxel(series: Sequence[tuple[float, int]], taxel: int,
                    config: CalibrationConfig) -> TaxelModel:
    c_min, c_max = amplitude(series)
    if c_max - c_min < config.amplitude_threshold:
        return TaxelModel(taxel, c_min, c_max, reason=ExclusionReason.LOW_AMPLITUDE)
    points = average_duplicates(series, config.pressure_bin_width)
    try:
        if len(points) < config.min_points:
            raise RankDeficientError(f"only {len(points)} averaged points")
        pressure = np.array([p.pressure for p in points])
        c_norm = normalize_capacitance([p.mean_raw for p in points], c_min, c_max)
        fit = fit_polynomial(np.column_stack([c_norm, pressure]))
    except RankDeficientError as exc:
        log.info("taxel %d excluded: %s", taxel, exc)
        return TaxelModel(taxel, c_min, c_max, reason=ExclusionReason.RANK_DEFICIENT)
    return TaxelModel(taxel, c_min, c_max, fit.coeffs, fit.residual_rms)


def calibrate(dataset: CalibrationDataset,
              config: CalibrationConfig = CalibrationConfig()) -> SkinModel:
    """Fit every taxel of ``dataset``; insensitive or unfittable ones are excluded.

    Raises:
        InsufficientDataError: the dataset has fewer samples than the
            minimum number of fit points.
        EmptyModelError: no taxel survived exclusion.
    """
    if len(dataset) < config.min_points:
        raise InsufficientDataError(
            f"{len(dataset)} samples, need at least {config.min_points}"
        )
    pressures = dataset.pressures
    counts = dataset.counts
    taxels = []
    for i in range(dataset.geometry.n_taxels):
        series = list(zip(pressures.tolist(), counts[:, i].tolist()))
        taxels.append(calibrate_taxel(series, i, config))
    model = SkinModel(dataset.geometry, tuple(taxels),
                      config.activation_threshold, config.amplitude_threshold)
    if not model.included:
        raise EmptyModelError("every taxel was excluded")
    log.info("calibrated %d taxels, excluded %d",
             len(model.included), len(model.excluded))
    return model
