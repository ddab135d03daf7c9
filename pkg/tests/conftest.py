import math

import numpy as np
import pytest

from superdirective.emcore import CONSTANTS, ArrayDesign, PhysicalConstants

F0 = 9.9e9
LAM = CONSTANTS.wavelength(F0)
LOSSLESS = PhysicalConstants(sigma_c=math.inf)


def random_design(rng, n, f=F0, min_gap=0.1, max_gap=0.6, lengths=(0.35, 0.55),
                  constants=CONSTANTS):
    lam = constants.wavelength(f)
    gaps = rng.uniform(min_gap, max_gap, n - 1) * lam
    x = np.concatenate([[0.0], np.cumsum(gaps)])
    l = rng.uniform(*lengths, n) * lam
    i = rng.uniform(0.2, 1.0, n) * np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    return ArrayDesign.from_arrays(f, x, l, i, constants=constants)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


_acceptance_lines = []


@pytest.fixture
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
