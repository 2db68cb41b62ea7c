"""Domain types shared by the calibration, estimation and simulation code.

All types are frozen dataclasses holding tuples, so they compare by value and
can be shared between threads. Pressures are in Pa and areas in m² throughout;
unit conversion to kPa happens only in :mod:`skincal.fileio`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from .errors import DatasetError, FrameShapeError, InvalidGeometryError, ProtocolError

ADC_MAX = 255
N_COEFFS = 6
DEFAULT_TAXEL_AREA = 2.0e-5


def _as_counts(values: Iterable[int], what: str) -> tuple[int, ...]:
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
            raise DatasetError(f"{what} must contain integers")
    if arr.size and (arr.min() < 0 or arr.max() > ADC_MAX):
        raise DatasetError(f"{what} contains values outside [0, {ADC_MAX}]")
    return tuple(int(v) for v in arr.ravel())


@dataclass(frozen=True)
class SkinGeometry:
    """Equal-area taxels grouped in triangular patches."""

    n_triangles: int
    taxels_per_triangle: int
    taxel_area: float = DEFAULT_TAXEL_AREA

    def __post_init__(self) -> None:
        if self.n_triangles <= 0 or self.taxels_per_triangle <= 0:
            raise InvalidGeometryError("triangle counts must be positive")
        if not self.taxel_area > 0 or not np.isfinite(self.taxel_area):
            raise InvalidGeometryError(f"taxel_area must be positive, got {self.taxel_area}")

    @property
    def n_taxels(self) -> int:
        return self.n_triangles * self.taxels_per_triangle

    def check_taxel(self, taxel: int) -> int:
        if not 0 <= taxel < self.n_taxels:
            raise IndexError(f"taxel {taxel} outside [0, {self.n_taxels})")
        return int(taxel)


def make_geometry(n_triangles: int, taxels_per_triangle: int,
                  taxel_area: float = DEFAULT_TAXEL_AREA) -> SkinGeometry:
    return SkinGeometry(int(n_triangles), int(taxels_per_triangle), float(taxel_area))


@dataclass(frozen=True)
class CalibrationSample:
    pressure: float
    frame: tuple[int, ...]

    def __post_init__(self) -> None:
        if not np.isfinite(self.pressure) or self.pressure < 0:
            raise DatasetError(f"pressure must be finite and >= 0, got {self.pressure}")
        object.__setattr__(self, "pressure", float(self.pressure))
        object.__setattr__(self, "frame", _as_counts(self.frame, "frame"))


@dataclass(frozen=True)
class CalibrationDataset:
    """K samples of (bag pressure, full raw frame), recorded while loading.

    Construction rejects frames whose length differs from the geometry and
    any decrease in pressure between consecutive samples.
    """

    geometry: SkinGeometry
    samples: tuple[CalibrationSample, ...] = ()

    def __post_init__(self) -> None:
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        n = self.geometry.n_taxels
        prev = -np.inf
        for k, s in enumerate(samples):
            if len(s.frame) != n:
                raise DatasetError(f"sample {k}: frame has {len(s.frame)} taxels, expected {n}")
            if s.pressure < prev:
                raise ProtocolError(
                    f"sample {k}: pressure {s.pressure} Pa below previous {prev} Pa"
                )
            prev = s.pressure

    def __len__(self) -> int:
        return len(self.samples)

    @cached_property
    def pressures(self) -> np.ndarray:
        arr = np.array([s.pressure for s in self.samples], dtype=float)
        arr.flags.writeable = False
        return arr

    @cached_property
    def counts(self) -> np.ndarray:
        """Raw counts as a read-only (K, n_taxels) integer array."""
        arr = np.array([s.frame for s in self.samples], dtype=np.int64)
        arr = arr.reshape(len(self.samples), self.geometry.n_taxels)
        arr.flags.writeable = False
        return arr


@dataclass(frozen=True)
class CapacitanceFrame:
    """One snapshot of raw counts for every taxel."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", _as_counts(self.counts, "frame"))

    def __len__(self) -> int:
        return len(self.counts)

    def check_shape(self, geometry: SkinGeometry, what: str = "frame") -> None:
        if len(self.counts) != geometry.n_taxels:
            raise FrameShapeError(
                f"{what} has {len(self.counts)} taxels, expected {geometry.n_taxels}"
            )

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)


class BaselineFrame(CapacitanceFrame):
    """Rest-state frame; activation is measured as the change from it."""


class ExclusionReason(str, enum.Enum):
    NONE = ""
    LOW_AMPLITUDE = "low-amplitude"
    RANK_DEFICIENT = "rank-deficient"


@dataclass(frozen=True)
class TaxelModel:
    """Calibrated pressure model for one taxel.

    ``coeffs`` are the constant-first quintic coefficients in normalized
    capacitance, mapping to Pa. They are ``None`` for excluded taxels.
    """

    taxel: int
    c_min: int
    c_max: int
    coeffs: Optional[tuple[float, ...]] = None
    residual_rms: float = 0.0
    reason: ExclusionReason = ExclusionReason.NONE

    def __post_init__(self) -> None:
        if self.c_min > self.c_max:
            raise ValueError(f"taxel {self.taxel}: c_min {self.c_min} > c_max {self.c_max}")
        if not self.residual_rms >= 0:
            raise ValueError(f"taxel {self.taxel}: residual_rms must be >= 0")
        object.__setattr__(self, "reason", ExclusionReason(self.reason))
        if self.excluded:
            object.__setattr__(self, "coeffs", None)
        else:
            if self.coeffs is None or len(self.coeffs) != N_COEFFS:
                raise ValueError(f"taxel {self.taxel}: need {N_COEFFS} coefficients")
            object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def excluded(self) -> bool:
        return self.reason is not ExclusionReason.NONE


@dataclass(frozen=True)
class SkinModel:
    geometry: SkinGeometry
    taxels: tuple[TaxelModel, ...]
    activation_threshold: int
    amplitude_threshold: int

    def __post_init__(self) -> None:
        taxels = tuple(self.taxels)
        object.__setattr__(self, "taxels", taxels)
        if [t.taxel for t in taxels] != list(range(self.geometry.n_taxels)):
            raise ValueError("SkinModel needs exactly one TaxelModel per taxel, in order")

    def __getitem__(self, taxel: int) -> TaxelModel:
        return self.taxels[self.geometry.check_taxel(taxel)]

    @property
    def included(self) -> list[int]:
        return [t.taxel for t in self.taxels if not t.excluded]

    @property
    def excluded(self) -> list[int]:
        return [t.taxel for t in self.taxels if t.excluded]

    def with_area(self, taxel_area: float) -> "SkinModel":
        """Same calibration on a skin whose taxels have a different area."""
        geometry = SkinGeometry(self.geometry.n_triangles,
                                self.geometry.taxels_per_triangle, taxel_area)
        return SkinModel(geometry, self.taxels, self.activation_threshold,
                         self.amplitude_threshold)


@dataclass(frozen=True)
class ForceEstimate:
    """Total normal force and its per-taxel decomposition.

    ``clamped`` lists activated taxels whose reading fell outside the
    calibrated count range, the overpressure case.
    """

    total_force: float
    per_taxel_pressure: dict[int, float] = field(default_factory=dict)
    clamped: frozenset[int] = frozenset()

    @property
    def n_activated(self) -> int:
        return len(self.per_taxel_pressure)

    @property
    def any_clamped(self) -> bool:
        return bool(self.clamped)

