"""Known-mass validation trials against a simulated skin."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import BaselineFrame, CapacitanceFrame, ForceEstimate, SkinModel
from .force import estimate_force
from .sim import SimSkin, contiguous_patch, generate_validation_frame, rest_frames

DEFAULT_PATCH_SIZE = 30


@dataclass(frozen=True)
class Trial:
    mass: float
    patch: tuple[int, ...]
    true_force: float
    estimate: ForceEstimate

    @property
    def relative_error(self) -> float:
        return abs(self.estimate.total_force - self.true_force) / self.true_force


def mean_baseline(frames: Sequence[CapacitanceFrame]) -> BaselineFrame:
    """Per-taxel mean of rest frames, rounded to whole counts."""
    if not frames:
        raise ValueError("need at least one rest frame")
    mean = np.mean([f.as_array() for f in frames], axis=0)
    return BaselineFrame(tuple(int(v) for v in np.round(mean)))


def run_trials(model: SkinModel, skin: SimSkin, masses: Sequence[float], n_trials: int,
               patch_size: int = DEFAULT_PATCH_SIZE, baseline_frames: int = 20,
               seed: int = 0) -> list[Trial]:
    """Place ``masses`` in turn on random contiguous patches and estimate the force.

    ``skin`` is reseeded from ``seed`` so results do not depend on how many
    frames were drawn from it before.
    """
    if not masses:
        raise ValueError("no masses given")
    skin = skin.reseeded(seed)
    patch_rng = np.random.default_rng([seed, 1])
    baseline = mean_baseline(rest_frames(skin, baseline_frames))
    trials = []
    for t in range(n_trials):
        mass = float(masses[t % len(masses)])
        patch = contiguous_patch(skin.geometry.n_taxels, patch_size, patch_rng)
        frame, true_force = generate_validation_frame(skin, mass, patch, baseline)
        trials.append(Trial(mass, patch, true_force, estimate_force(frame, baseline, model)))
    return trials


def mean_relative_error(trials: Sequence[Trial]) -> float:
    return float(np.mean([t.relative_error for t in trials]))
