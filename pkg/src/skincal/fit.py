"""Quintic least-squares fit of pressure against normalized capacitance.

Raw counts are mapped to [-1, 1] before building powers; an 8-bit count
raised to the fifth power makes the design matrix hopelessly ill-conditioned.
The least-squares problem is solved through a Householder QR factorization.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .core import N_COEFFS
from .errors import DegenerateRangeError, InvalidDataError, RankDeficientError

class FitPoint(NamedTuple):
    c_norm: float
    pressure: float


class FitResult(NamedTuple):
    coeffs: tuple[float, ...]
    residual_rms: float


def normalize_capacitance(raw, c_min: float, c_max: float):
    """Map ``raw`` affinely so that c_min -> -1 and c_max -> +1, clamped.

    Works elementwise on arrays; scalars come back as ``float``.
    """
    if not c_min < c_max:
        raise DegenerateRangeError(f"need c_min < c_max, got [{c_min}, {c_max}]")
    c = 2.0 * (np.asarray(raw, dtype=float) - c_min) / (c_max - c_min) - 1.0
    c = np.clip(c, -1.0, 1.0)
    return float(c) if c.ndim == 0 else c


def build_regressor(c_norm) -> np.ndarray:
    """Row ``[1, c, c², c³, c⁴, c⁵]``, or one row per entry for array input."""
    c = np.asarray(c_norm, dtype=float)
    return c[..., None] ** np.arange(N_COEFFS)


def evaluate_polynomial(coeffs, c_norm):
    """Pressure predicted by ``coeffs`` at ``c_norm`` (scalar or array)."""
    out = build_regressor(c_norm) @ np.asarray(coeffs, dtype=float)
    return float(out) if out.ndim == 0 else out


def fit_polynomial(points: Iterable[FitPoint] | np.ndarray) -> FitResult:
    """Least-squares quintic through ``(c_norm, pressure)`` points.

    Raises:
        InvalidDataError: a coordinate is NaN or infinite.
        RankDeficientError: fewer than six distinct abscissae, or the
            factorization is numerically singular.
    """
    pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points,
                     dtype=float)
    if pts.size == 0:
        raise RankDeficientError("no points to fit")
    pts = pts.reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise InvalidDataError("fit points must be finite")
    c, p = pts[:, 0], pts[:, 1]
    n_distinct = len(np.unique(c))
    if n_distinct < N_COEFFS:
        raise RankDeficientError(
            f"{n_distinct} distinct abscissae, need at least {N_COEFFS}"
        )
    design = build_regressor(c)
    q, r = np.linalg.qr(design, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * len(c) * np.finfo(float).eps:
        raise RankDeficientError("design matrix is numerically singular")
    coeffs = solve_triangular(r, q.T @ p)
    resid = p - design @ coeffs
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return FitResult(tuple(float(v) for v in coeffs), rms)
