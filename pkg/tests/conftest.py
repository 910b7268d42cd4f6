"""Shared fixtures: the two standard parameter sets used throughout."""

import pytest

from qbmlab import ModelParams, derive_scales


@pytest.fixture(scope="session")
def unit_params():
    """m = gamma = kT = hbar = 1: alpha = 1, a^2 = 4, D = 2."""
    return ModelParams(m=1.0, gamma=1.0, kT=1.0, hbar=1.0)


@pytest.fixture(scope="session")
def unit_scales(unit_params):
    return derive_scales(unit_params)


@pytest.fixture(scope="session")
def std_params():
    """m = kT = hbar = 1, gamma = 1/4: alpha = 1/2, a^2 = 1, t_loc = 2."""
    return ModelParams(m=1.0, gamma=0.25, kT=1.0, hbar=1.0)


@pytest.fixture(scope="session")
def std_scales(std_params):
    return derive_scales(std_params)
