import numpy as np
import pytest

from skincal.calibration import calibrate
from skincal.sim import PressureSchedule, default_skin, generate_sweep

PAPER_SWEEP = PressureSchedule.linear(0, 70, 1, dwell_samples=3)


def normal_equations_solve(c, p):
    """Independent least-squares oracle: explicit Vandermonde + normal equations."""
    c = np.asarray(c, dtype=float)
    a = np.empty((len(c), 6))
    for j in range(6):
        a[:, j] = [x ** j for x in c]
    return np.linalg.solve(a.T @ a, a.T @ np.asarray(p, dtype=float))


@pytest.fixture(scope="session")
def default_run():
    skin = default_skin(seed=11)
    dataset = generate_sweep(skin, PAPER_SWEEP)
    return skin, dataset, calibrate(dataset)


@pytest.fixture(scope="session")
def noiseless_run():
    skin = default_skin(seed=12, noise_sigma=0.0, dead_fraction=0.0)
    dataset = generate_sweep(skin, PAPER_SWEEP)
    return skin, dataset, calibrate(dataset)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test still asserts on its own."""
    def record(label, passed, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
