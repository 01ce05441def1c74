import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE = {}


def evaluate_at(F, z):
    """Value of a grid field at an arbitrary point through its spectral interpolant."""
    grid = F.grid
    coeffs = grid.to_modes(F.values)
    row = grid.interpolation_matrix(np.array([abs(z)]))[0]
    radial = row @ coeffs
    return complex(np.sum(radial * np.exp(1j * grid.modes * np.angle(z))))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
