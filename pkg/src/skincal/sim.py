"""Synthetic capacitive skin with known ground truth.

Each taxel is a parallel-plate capacitor whose soft dielectric is squeezed
by the differential pressure. The dielectric obeys Hooke's law at small
loads and stiffens as it compresses; its displacement

    d(P) = d_max * (1 - exp(-P * A / (k * d_max))),   d_max = rho * gap0

has slope ``A / k`` at rest and never exceeds ``rho * gap0`` (rho < 1), so
the gap cannot close. The capacitance change ``eps*A*(1/(gap0 - d) - 1/gap0)``
is scaled by a per-taxel gain and added to a rest offset to give counts.
For ``rho = 0.5`` the count curve is ``offset + gain*C0*tanh(P*A/(2*k*d_max))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    ADC_MAX,
    BaselineFrame,
    CalibrationDataset,
    CalibrationSample,
    CapacitanceFrame,
    SkinGeometry,
    make_geometry,
)
from .errors import FrameShapeError, InvalidPatchError, ProtocolError

GRAVITY = 9.81
VACUUM_PERMITTIVITY = 8.8541878128e-12
PF = 1e-12

# Population defaults. The count scale is chosen so that the across-taxel
# spread is ~6 counts at rest and ~26 counts at 70 kPa with a 2e-5 m² taxel.
DEFAULT_STIFFNESS = 600.0  # N/m
DEFAULT_PERMITTIVITY = 3.0 * VACUUM_PERMITTIVITY  # silicone foam, F/m
DEFAULT_REST_GAP = 2.0e-3  # m
DEFAULT_COMPRESSION_LIMIT = 0.5
DEFAULT_GAIN_RANGE = (230.0, 500.0)  # counts per pF
DEFAULT_STIFFNESS_SPREAD = 0.1
DEFAULT_OFFSET_MEAN = 60.0
DEFAULT_OFFSET_STD = 6.0
DEFAULT_NOISE_SIGMA = 1.0
DEFAULT_DEAD_FRACTION = 0.05


@dataclass(frozen=True)
class GroundTruthTaxel:
    """Hidden physical parameters of one simulated taxel.

    Attributes:
        stiffness: dielectric stiffness k at rest, N/m.
        permittivity: absolute permittivity of the dielectric, F/m.
        rest_gap: plate separation at zero load, m.
        compression_limit: fraction of ``rest_gap`` the dielectric can
            be compressed by, in (0, 1).
        gain: counts per pF of capacitance change; 0 for dead taxels.
        offset: count reported at zero load.
        noise_sigma: standard deviation of additive Gaussian count noise.
        dead: taxel does not respond to pressure.
    """

    stiffness: float = DEFAULT_STIFFNESS
    permittivity: float = DEFAULT_PERMITTIVITY
    rest_gap: float = DEFAULT_REST_GAP
    compression_limit: float = DEFAULT_COMPRESSION_LIMIT
    gain: float = 400.0
    offset: int = 60
    noise_sigma: float = 0.0
    dead: bool = False

    def __post_init__(self) -> None:
        if not self.stiffness > 0:
            raise ValueError("stiffness must be > 0")
        if not (self.permittivity > 0 and self.rest_gap > 0):
            raise ValueError("permittivity and rest_gap must be > 0")
        if not 0 < self.compression_limit < 1:
            raise ValueError("compression_limit must lie in (0, 1)")
        if self.gain < 0 or self.noise_sigma < 0:
            raise ValueError("gain and noise_sigma must be >= 0")
        if not 0 <= self.offset <= ADC_MAX:
            raise ValueError(f"offset must lie in [0, {ADC_MAX}]")
        if self.dead and self.gain != 0:
            raise ValueError("a dead taxel must have zero gain")


def displacement(taxel: GroundTruthTaxel, pressure: float, area: float) -> float:
    d_max = taxel.compression_limit * taxel.rest_gap
    return d_max * -math.expm1(-pressure * area / (taxel.stiffness * d_max))


def capacitance_change(taxel: GroundTruthTaxel, pressure: float, area: float) -> float:
    """C(P) - C(0) in farads."""
    gap = taxel.rest_gap - displacement(taxel, pressure, area)
    return taxel.permittivity * area * (1.0 / gap - 1.0 / taxel.rest_gap)


def true_capacitance_counts(taxel: GroundTruthTaxel, pressure: float, area: float) -> float:
    """Noise-free, unquantized count reading at ``pressure`` Pa."""
    if pressure < 0:
        raise ValueError("pressure must be >= 0")
    return taxel.offset + taxel.gain * capacitance_change(taxel, pressure, area) / PF


def true_pressure(taxel: GroundTruthTaxel, counts: float, area: float) -> float:
    """Closed-form inverse of :func:`true_capacitance_counts` for a live taxel."""
    if taxel.gain == 0:
        raise ValueError("a dead taxel has no inverse")
    delta_c = (counts - taxel.offset) * PF / taxel.gain
    gap = 1.0 / (delta_c / (taxel.permittivity * area) + 1.0 / taxel.rest_gap)
    d_max = taxel.compression_limit * taxel.rest_gap
    frac = (taxel.rest_gap - gap) / d_max
    if not 0 <= frac < 1:
        raise ValueError(f"{counts} counts outside the taxel's response range")
    return -taxel.stiffness * d_max / area * math.log1p(-frac)


@dataclass(frozen=True)
class PressureSchedule:
    """Non-decreasing pressure levels (Pa), each held for ``dwell_samples`` frames."""

    levels: tuple[float, ...]
    dwell_samples: int = 1

    def __post_init__(self) -> None:
        levels = tuple(float(p) for p in self.levels)
        object.__setattr__(self, "levels", levels)
        if self.dwell_samples < 1:
            raise ValueError("dwell_samples must be >= 1")
        if any(p < 0 for p in levels):
            raise ValueError("pressure levels must be >= 0")
        if any(b < a for a, b in zip(levels, levels[1:])):
            raise ProtocolError("pressure schedule must be non-decreasing")

    @classmethod
    def linear(cls, start_kpa: float, stop_kpa: float, step_kpa: float,
               dwell_samples: int = 1) -> "PressureSchedule":
        """Levels start, start+step, ... up to and including stop (kPa)."""
        if step_kpa <= 0:
            raise ValueError("step must be > 0")
        n = int(math.floor((stop_kpa - start_kpa) / step_kpa + 1e-9)) + 1
        return cls(tuple((start_kpa + j * step_kpa) * 1e3 for j in range(max(n, 0))),
                   dwell_samples)

    def pressures(self) -> list[float]:
        return [p for p in self.levels for _ in range(self.dwell_samples)]


@dataclass
class SimSkin:
    """A simulated skin; frame sampling advances its seeded random state."""

    geometry: SkinGeometry
    taxels: tuple[GroundTruthTaxel, ...]
    rng_seed: int = 0
    rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.taxels = tuple(self.taxels)
        if len(self.taxels) != self.geometry.n_taxels:
            raise ValueError(
                f"{len(self.taxels)} taxels for a {self.geometry.n_taxels}-taxel geometry"
            )
        self.rng = np.random.default_rng(self.rng_seed)

    @property
    def dead(self) -> list[int]:
        return [i for i, t in enumerate(self.taxels) if t.dead]

    def reseeded(self, seed: int) -> "SimSkin":
        return SimSkin(self.geometry, self.taxels, seed)

    def _true_counts(self, pressures: np.ndarray) -> np.ndarray:
        area = self.geometry.taxel_area
        return np.array([true_capacitance_counts(t, float(p), area)
                         for t, p in zip(self.taxels, pressures)])

    def read(self, pressures: Sequence[float]) -> tuple[int, ...]:
        """One quantized frame with a per-taxel pressure vector applied."""
        pressures = np.asarray(pressures, dtype=float)
        sigma = np.array([t.noise_sigma for t in self.taxels])
        noisy = self._true_counts(pressures) + sigma * self.rng.standard_normal(len(sigma))
        return tuple(int(v) for v in np.clip(np.round(noisy), 0, ADC_MAX))


def default_skin(seed: int = 0, geometry: Optional[SkinGeometry] = None,
                 noise_sigma: float = DEFAULT_NOISE_SIGMA,
                 dead_fraction: float = DEFAULT_DEAD_FRACTION,
                 gain_range: tuple[float, float] = DEFAULT_GAIN_RANGE,
                 offset_mean: float = DEFAULT_OFFSET_MEAN,
                 offset_std: float = DEFAULT_OFFSET_STD,
                 stiffness_spread: float = DEFAULT_STIFFNESS_SPREAD) -> SimSkin:
    """Draw a taxel population resembling the iCub forearm (23 x 10 taxels).

    The same seed draws the population and then drives frame noise, so
    ``default_skin(s)`` is fully reproducible.
    """
    if geometry is None:
        geometry = make_geometry(23, 10)
    if not 0 <= dead_fraction <= 1:
        raise ValueError("dead_fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    n = geometry.n_taxels
    n_dead = int(round(dead_fraction * n))
    dead = np.zeros(n, dtype=bool)
    dead[rng.choice(n, n_dead, replace=False)] = True
    gains = rng.uniform(*gain_range, size=n)
    stiffness = DEFAULT_STIFFNESS * rng.uniform(1 - stiffness_spread, 1 + stiffness_spread, n)
    offsets = np.clip(np.round(rng.normal(offset_mean, offset_std, n)), 0, ADC_MAX)
    taxels = tuple(
        GroundTruthTaxel(stiffness=float(stiffness[i]),
                         gain=0.0 if dead[i] else float(gains[i]),
                         offset=int(offsets[i]), noise_sigma=float(noise_sigma),
                         dead=bool(dead[i]))
        for i in range(n)
    )
    return SimSkin(geometry, taxels, seed)


def sample_frame(skin: SimSkin, pressure: float) -> CalibrationSample:
    """Frame under uniform ``pressure`` on every taxel, as in the vacuum bag."""
    if pressure < 0:
        raise ValueError("pressure must be >= 0")
    return CalibrationSample(pressure, skin.read(np.full(skin.geometry.n_taxels, pressure)))


def generate_sweep(skin: SimSkin, schedule: PressureSchedule) -> CalibrationDataset:
    samples = [sample_frame(skin, p) for p in schedule.pressures()]
    return CalibrationDataset(skin.geometry, tuple(samples))


def rest_frames(skin: SimSkin, n_frames: int) -> list[CapacitanceFrame]:
    return [CapacitanceFrame(sample_frame(skin, 0.0).frame) for _ in range(n_frames)]


def contiguous_patch(n_taxels: int, size: int, rng: np.random.Generator) -> tuple[int, ...]:
    if not 0 < size <= n_taxels:
        raise InvalidPatchError(f"patch size {size} not in [1, {n_taxels}]")
    start = int(rng.integers(0, n_taxels - size + 1))
    return tuple(range(start, start + size))


def generate_validation_frame(skin: SimSkin, mass: float, patch: Iterable[int],
                              baseline: Optional[BaselineFrame] = None,
                              ) -> tuple[CapacitanceFrame, float]:
    """Frame with ``mass`` kg resting evenly on ``patch``, plus the true force in N.

    The weight is spread as a uniform pressure over every patch taxel, dead
    ones included. ``baseline``, when given, is only checked for shape.
    """
    patch = sorted(set(int(i) for i in patch))
    n = skin.geometry.n_taxels
    if not patch:
        raise InvalidPatchError("patch is empty")
    if patch[0] < 0 or patch[-1] >= n:
        raise InvalidPatchError(f"patch taxels must lie in [0, {n})")
    if baseline is not None and len(baseline) != n:
        raise FrameShapeError(f"baseline has {len(baseline)} taxels, expected {n}")
    true_force = mass * GRAVITY
    pressures = np.zeros(n)
    pressures[patch] = true_force / (len(patch) * skin.geometry.taxel_area)
    return CapacitanceFrame(skin.read(pressures)), true_force


def with_noise(skin: SimSkin, noise_sigma: float) -> SimSkin:
    taxels = tuple(replace(t, noise_sigma=noise_sigma) for t in skin.taxels)
    return SimSkin(skin.geometry, taxels, skin.rng_seed)
