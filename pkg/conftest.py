"""
Shared pytest fixtures for the annuli test suite.

Long Monte Carlo runs are marked `slow` and skipped unless --runslow is given.
"""

import logging

import pytest

from src.models.lattice import EllipseLattice
from src.models.smoothing import build_kernel


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow Monte Carlo tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running Monte Carlo or large-enumeration test")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def kernel():
    return build_kernel()


@pytest.fixture(scope="session")
def lattice_e():
    return EllipseLattice.from_preset("e")


@pytest.fixture(scope="session")
def lattice_sqrt2():
    return EllipseLattice.from_preset("sqrt2")


@pytest.fixture
def quiet_logger():
    logger = logging.getLogger("annuli.tests")
    logger.setLevel(logging.WARNING)
    return logger
