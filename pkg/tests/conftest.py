import numpy as np
import pytest
from fastapi.testclient import TestClient

from main import app
from src.core.depend_service import get_pcf_service
from src.entity.models import PointPattern, RngSeed, Window
from src.schemas.simulation import ModelKind, ModelSpec
from src.services.basis import build_basis
from src.services.pcf import PcfService
from src.services.simulate import sim_poisson, simulate

TEST_K_MAX = 8


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run Monte-Carlo acceptance checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def unit_window():
    return Window(0.0, 0.0, 1.0, 1.0)


@pytest.fixture
def wide_window():
    return Window.square(2.0)


@pytest.fixture
def basis():
    return build_basis(R=0.125, r_min=0.0, k_max=TEST_K_MAX)


@pytest.fixture
def poisson_pattern(unit_window):
    return sim_poisson(unit_window, 200.0, RngSeed(2024))


@pytest.fixture
def thomas_model():
    return ModelSpec.study_default(ModelKind.THOMAS)


@pytest.fixture
def thomas_pattern(thomas_model):
    return simulate(thomas_model, RngSeed(7))


@pytest.fixture
def small_pattern(unit_window):
    rng = np.random.default_rng(11)
    return PointPattern(rng.uniform(0, 1, 40), rng.uniform(0, 1, 40), unit_window)


@pytest.fixture(scope="module")
def client():
    app.dependency_overrides[get_pcf_service] = lambda: PcfService(k_max=TEST_K_MAX)

    yield TestClient(app)

    app.dependency_overrides.clear()
