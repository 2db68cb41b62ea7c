"""Runtime force estimation from a calibrated skin model."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import BaselineFrame, CapacitanceFrame, ForceEstimate, SkinModel
from .errors import ExcludedTaxelError
from .fit import evaluate_polynomial, normalize_capacitance


class TaxelPressure(NamedTuple):
    pressure: float
    clamped: bool


def activated_taxels(frame: CapacitanceFrame, baseline: BaselineFrame,
                     model: SkinModel) -> set[int]:
    """Included taxels whose reading moved at least the activation threshold."""
    frame.check_shape(model.geometry)
    baseline.check_shape(model.geometry, "baseline")
    delta = np.abs(frame.as_array() - baseline.as_array())
    hit = np.flatnonzero(delta >= model.activation_threshold)
    return {int(i) for i in hit if not model.taxels[i].excluded}


def taxel_pressure(model: SkinModel, taxel: int, raw: int) -> TaxelPressure:
    """Pressure on one taxel; raw counts outside the calibrated range are clamped.

    Negative predictions, which only come from fit noise near zero load, are
    reported as 0 Pa.
    """
    tm = model[taxel]
    if tm.excluded:
        raise ExcludedTaxelError(f"taxel {taxel} is excluded ({tm.reason.value})")
    clamped = not tm.c_min <= raw <= tm.c_max
    c = normalize_capacitance(raw, tm.c_min, tm.c_max)
    return TaxelPressure(max(evaluate_polynomial(tm.coeffs, c), 0.0), clamped)


def estimate_force(frame: CapacitanceFrame, baseline: BaselineFrame,
                   model: SkinModel) -> ForceEstimate:
    """Sum pressure times taxel area over the activated taxels."""
    active = sorted(activated_taxels(frame, baseline, model))
    pressures: dict[int, float] = {}
    clamped = set()
    for i in active:
        p, was_clamped = taxel_pressure(model, i, frame.counts[i])
        pressures[i] = p
        if was_clamped:
            clamped.add(i)
    total = model.geometry.taxel_area * sum(pressures.values())
    return ForceEstimate(total, pressures, frozenset(clamped))
