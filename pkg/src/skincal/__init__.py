"""Calibration toolkit for capacitive tactile-sensor arrays.

Fit a quintic pressure-vs-capacitance model per taxel from a uniform-pressure
sweep, drop insensitive taxels, and estimate total normal force from
calibrated pressures. :mod:`skincal.sim` provides a synthetic skin with
known ground truth.
"""

from .calibration import CalibrationConfig, calibrate
from .core import (
    BaselineFrame,
    CalibrationDataset,
    CalibrationSample,
    CapacitanceFrame,
    ForceEstimate,
    SkinGeometry,
    SkinModel,
    TaxelModel,
    make_geometry,
)
from .fileio import load_model_file, parse_sweep_csv, write_model_file
from .fit import build_regressor, evaluate_polynomial, fit_polynomial, normalize_capacitance
from .force import activated_taxels, estimate_force, taxel_pressure

__version__ = "0.1.0"

__all__ = [
    "BaselineFrame", "CalibrationConfig", "CalibrationDataset", "CalibrationSample",
    "CapacitanceFrame", "ForceEstimate", "SkinGeometry", "SkinModel", "TaxelModel",
    "activated_taxels", "build_regressor", "calibrate", "estimate_force",
    "evaluate_polynomial", "fit_polynomial", "load_model_file", "make_geometry",
    "normalize_capacitance", "parse_sweep_csv", "taxel_pressure", "write_model_file",
]
