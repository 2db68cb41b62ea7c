import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import normal_equations_solve
from skincal.errors import DegenerateRangeError, InvalidDataError, RankDeficientError
from skincal.fit import (
    FitPoint,
    build_regressor,
    evaluate_polynomial,
    fit_polynomial,
    normalize_capacitance,
)

coeff = st.floats(-1e4, 1e4, allow_nan=False)
quintics = st.tuples(coeff, coeff, coeff, coeff, coeff, coeff)


def assert_coeffs_close(got, want, rel):
    want = np.asarray(want, dtype=float)
    scale = max(np.abs(want).max(), 1.0)
    np.testing.assert_allclose(got, want, rtol=rel, atol=rel * scale)


@pytest.mark.parametrize("raw, expected", [(10, -1.0), (30, 1.0), (20, 0.0), (0, -1.0), (99, 1.0)])
def test_normalize_endpoints_and_clamp(raw, expected):
    assert normalize_capacitance(raw, 10, 30) == expected


def test_normalize_degenerate_range():
    with pytest.raises(DegenerateRangeError):
        normalize_capacitance(5, 7, 7)
    with pytest.raises(DegenerateRangeError):
        normalize_capacitance(5, 9, 7)


@pytest.mark.parametrize("c, row", [
    (0.0, [1, 0, 0, 0, 0, 0]),
    (1.0, [1, 1, 1, 1, 1, 1]),
    (-1.0, [1, -1, 1, -1, 1, -1]),
])
def test_build_regressor(c, row):
    assert build_regressor(c).tolist() == row


def test_evaluate_polynomial_examples():
    assert evaluate_polynomial((7.5, 0, 0, 0, 0, 0), -0.3) == 7.5
    assert evaluate_polynomial((0, 1, 0, 0, 0, 0), 0.5) == 0.5
    assert evaluate_polynomial((3, 2, 0, -1, 0, 0), 0.3) == pytest.approx(3.573, abs=1e-12)


def test_exact_recovery_of_cubic():
    c = np.linspace(-1, 1, 8)
    p = 3 + 2 * c - c ** 3
    fit = fit_polynomial([FitPoint(x, y) for x, y in zip(c, p)])
    assert_coeffs_close(fit.coeffs, [3, 2, 0, -1, 0, 0], 1e-8)
    assert fit.residual_rms <= 1e-8


def test_zero_pressures_give_zero_model():
    c = np.linspace(-1, 1, 6)
    fit = fit_polynomial(np.column_stack([c, np.zeros(6)]))
    assert fit.coeffs == (0.0,) * 6
    assert fit.residual_rms == 0.0


def test_noisy_fit_matches_normal_equations_oracle():
    rng = np.random.default_rng(5)
    c = rng.uniform(-1, 1, 40)
    true = np.array([1200.0, -300.0, 50.0, 800.0, -20.0, 110.0])
    p = build_regressor(c) @ true + rng.normal(0, 25.0, 40)
    fit = fit_polynomial(np.column_stack([c, p]))
    np.testing.assert_allclose(fit.coeffs, normal_equations_solve(c, p), rtol=0, atol=1e-6)


def test_too_few_distinct_abscissae():
    pts = [(0.1, 1.0), (0.1, 2.0), (0.2, 1.0), (0.3, 1.0), (0.4, 0.0), (0.5, 1.0), (0.5, 3.0)]
    with pytest.raises(RankDeficientError):
        fit_polynomial(pts)
    with pytest.raises(RankDeficientError):
        fit_polynomial([])


def test_non_finite_input():
    pts = [(x, 1.0) for x in np.linspace(-1, 1, 7)]
    pts[3] = (0.0, np.nan)
    with pytest.raises(InvalidDataError):
        fit_polynomial(pts)


@settings(max_examples=60, deadline=None)
@given(quintics, st.integers(6, 40), st.integers(0, 2 ** 32 - 1))
def test_fit_idempotence(coeffs, n, seed):
    c = np.linspace(-1, 1, n)
    p = evaluate_polynomial(coeffs, c)
    fit = fit_polynomial(np.column_stack([c, p]))
    assert_coeffs_close(fit.coeffs, coeffs, 1e-8)


@settings(max_examples=60, deadline=None)
@given(quintics, st.integers(8, 60), st.integers(0, 2 ** 32 - 1))
def test_residual_orthogonality_and_permutation(coeffs, n, seed):
    rng = np.random.default_rng(seed)
    c = np.sort(rng.uniform(-1, 1, n))
    c = np.unique(np.round(c, 6))
    if len(c) < 8 or np.min(np.diff(c)) < 1e-3:
        return
    p = evaluate_polynomial(coeffs, c) + rng.normal(0, 100.0, len(c))
    fit = fit_polynomial(np.column_stack([c, p]))
    design = build_regressor(c)
    grad = design.T @ (p - design @ np.array(fit.coeffs))
    # absolute floor covers components where A^T p itself is ~0
    bound = 1e-6 * np.abs(design.T @ p) + 1e-9 * np.abs(design.T).sum(axis=1) * np.abs(p).max()
    assert np.all(np.abs(grad) <= bound)

    perm = rng.permutation(len(c))
    refit = fit_polynomial(np.column_stack([c[perm], p[perm]]))
    assert_coeffs_close(refit.coeffs, fit.coeffs, 1e-10)
