from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PAPER_SWEEP
from skincal.calibration import (
    CalibrationConfig,
    amplitude,
    average_duplicates,
    calibrate,
    taxel_series,
)
from skincal.core import CalibrationDataset, CalibrationSample, ExclusionReason, make_geometry
from skincal.errors import EmptyDataError, EmptyModelError, InsufficientDataError
from skincal.fit import build_regressor, normalize_capacitance
from skincal.force import taxel_pressure
from skincal.sim import GroundTruthTaxel, SimSkin, default_skin, generate_sweep


def small_dataset():
    g = make_geometry(1, 2)
    return CalibrationDataset(g, [CalibrationSample(0.0, (10, 50)),
                                  CalibrationSample(500.0, (12, 50)),
                                  CalibrationSample(900.0, (15, 51))])


def test_taxel_series_projection():
    assert taxel_series(small_dataset(), 0) == [(0.0, 10), (500.0, 12), (900.0, 15)]
    assert taxel_series(CalibrationDataset(make_geometry(1, 2)), 1) == []
    with pytest.raises(IndexError):
        taxel_series(small_dataset(), 2)


def test_noiseless_live_taxel_series_is_monotone():
    skin = default_skin(seed=3, noise_sigma=0.0, dead_fraction=0.0)
    ds = generate_sweep(skin, PAPER_SWEEP)
    for i in (0, 57, 229):
        raw = [r for _, r in taxel_series(ds, i)]
        assert all(b >= a for a, b in zip(raw, raw[1:]))
        assert raw[-1] > raw[0]


def test_average_duplicates_examples():
    assert average_duplicates([(1000, 10), (1000, 12)], 500) == [(1000.0, 11.0)]
    assert average_duplicates([(0, 5), (700, 6)], 500) == [(0.0, 5.0), (700.0, 6.0)]
    assert average_duplicates([], 100) == []


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 7e4), st.integers(0, 255)), max_size=80),
       st.floats(10.0, 5000.0))
def test_average_duplicates_matches_hash_grouping(series, width):
    groups = defaultdict(list)
    for p, r in series:
        groups[int(p // width)].append((p, r))
    expected = [(np.mean([p for p, _ in groups[k]]), np.mean([r for _, r in groups[k]]))
                for k in sorted(groups)]
    got = average_duplicates(series, width)
    assert len(got) == len(expected)
    for (gp, gr), (ep, er) in zip(got, expected):
        assert gp == pytest.approx(ep, rel=1e-12, abs=1e-9)
        assert gr == pytest.approx(er, rel=1e-12)


def test_amplitude_examples():
    assert amplitude([(0, 10), (1, 20), (2, 15)]) == (10, 20)
    assert amplitude([(0, 42)]) == (42, 42)
    with pytest.raises(EmptyDataError):
        amplitude([])


def test_dead_taxel_amplitude_is_tiny():
    dead = GroundTruthTaxel(gain=0.0, offset=80, noise_sigma=0.3, dead=True)
    skin = SimSkin(make_geometry(1, 1), (dead,), rng_seed=4)
    ds = generate_sweep(skin, PAPER_SWEEP)
    lo, hi = amplitude(taxel_series(ds, 0))
    assert hi - lo <= 2


def test_calibrate_default_skin(default_run):
    skin, ds, model = default_run
    assert model.excluded == sorted(skin.dead)
    assert 0.03 <= len(model.excluded) / 230 <= 0.07
    assert all(model.taxels[i].reason is ExclusionReason.LOW_AMPLITUDE for i in model.excluded)
    # fit residual stays within the pressure span covered by ~2 counts of noise
    for i in model.included:
        assert model.taxels[i].residual_rms < 2000.0


def test_rest_point_within_three_residuals(default_run):
    _, ds, model = default_run
    p_min = ds.pressures.min()
    for i in model.included:
        tm = model.taxels[i]
        p, _ = taxel_pressure(model, i, tm.c_min)
        assert abs(p - p_min) <= 3 * tm.residual_rms


def test_single_taxel_exact_quintic():
    g = make_geometry(1, 1)
    coeffs = np.array([25000.0, 30000.0, 5000.0, -4000.0, 1000.0, 500.0])
    raw = np.arange(20, 120)
    c = normalize_capacitance(raw, 20, 119)
    pressures = build_regressor(c) @ coeffs
    assert np.all(np.diff(pressures) > 0)
    ds = CalibrationDataset(g, [CalibrationSample(p, (int(r),)) for p, r in zip(pressures, raw)])
    model = calibrate(ds, CalibrationConfig(pressure_bin_width=1e-3))
    got = build_regressor(c) @ np.array(model.taxels[0].coeffs)
    np.testing.assert_allclose(got, pressures, rtol=0, atol=1e-6)


def test_all_dead_skin_raises():
    skin = default_skin(seed=1, geometry=make_geometry(2, 5), dead_fraction=1.0, noise_sigma=0.3)
    with pytest.raises(EmptyModelError):
        calibrate(generate_sweep(skin, PAPER_SWEEP))


def test_too_few_samples_raises():
    with pytest.raises(InsufficientDataError):
        calibrate(small_dataset())


def test_rank_deficient_taxel_is_excluded():
    # a step response gives only two distinct averaged raw levels
    g = make_geometry(1, 1)
    samples = [CalibrationSample(1000.0 * k, (10 if k < 5 else 40,)) for k in range(20)]
    with pytest.raises(EmptyModelError):
        calibrate(CalibrationDataset(g, samples))
    g2 = make_geometry(1, 2)
    samples = [CalibrationSample(1000.0 * k, (10 if k < 5 else 40, 10 + 3 * k))
               for k in range(20)]
    model = calibrate(CalibrationDataset(g2, samples))
    assert model.taxels[0].reason is ExclusionReason.RANK_DEFICIENT
    assert model.included == [1]


def test_exclusion_monotone_in_threshold(default_run):
    _, ds, _ = default_run
    previous = set()
    for thr in (0, 5, 10, 30, 55, 80):
        try:
            excluded = set(calibrate(ds, CalibrationConfig(amplitude_threshold=thr)).excluded)
        except EmptyModelError:
            excluded = set(range(230))
        assert previous <= excluded
        previous = excluded


def test_calibration_is_deterministic(default_run):
    _, ds, model = default_run
    assert calibrate(ds) == model


def test_gain_spread_widens_with_pressure(default_run):
    _, ds, _ = default_run
    p = ds.pressures
    assert ds.counts[p == p.max()].std(axis=1).mean() > ds.counts[p == 0].std(axis=1).mean()


def test_config_validation():
    with pytest.raises(ValueError):
        CalibrationConfig(min_points=5)
    with pytest.raises(ValueError):
        CalibrationConfig(pressure_bin_width=0)
    with pytest.raises(ValueError):
        CalibrationConfig(amplitude_threshold=-1)
