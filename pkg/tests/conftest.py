import logging

import pytest

from app.modules.core_types import RB87_GAMMA, rb87_vapor
from app.modules.doppler_average import FixedNodeIntegrator, QuadratureConfig


@pytest.fixture
def gamma() -> float:
    return RB87_GAMMA


@pytest.fixture
def rb87():
    return rb87_vapor()


@pytest.fixture
def medium(rb87):
    return rb87[0]


@pytest.fixture
def pump(rb87):
    return rb87[1]


@pytest.fixture
def quad() -> QuadratureConfig:
    return QuadratureConfig()


@pytest.fixture
def fixed() -> FixedNodeIntegrator:
    return FixedNodeIntegrator()


@pytest.fixture(autouse=True)
def _restore_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
    root.setLevel(level)
