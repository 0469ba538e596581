import functools

import numpy as np
import pytest

from recoilscatter import ModelParams, SweepRequest, sweep

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def cached_sweep(eps, omega, gamma, lo=0.7, hi=2.2, n=400):
    """Spectra shared between test modules; each parameter set runs once per session."""
    return tuple(sweep(SweepRequest(ModelParams(eps, omega, gamma), lo, hi, n)))


@pytest.fixture
def sweep_cache():
    return cached_sweep


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
