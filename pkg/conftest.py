import math

import pytest

from phtlab.core.config import settings
from phtlab.schemas.schemas import Point
from phtlab.services.corpus import CorpusService
from phtlab.services.geometry import GeometryService

THREE_HALVES_PI = 3.0 * math.pi / 2.0


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size corpus checks, deselect with -m 'not slow'")


@pytest.fixture(autouse=True)
def single_process(monkeypatch):
    """Keep per-angle fan-out inline during tests"""
    monkeypatch.setattr(settings, "JOBS", 1)


@pytest.fixture
def square():
    return CorpusService.named("square")


@pytest.fixture
def arrowhead():
    return CorpusService.named("arrowhead")


@pytest.fixture
def arrowhead_center():
    return Point(x=2.0, y=0.5)


@pytest.fixture
def perturbed_arrowhead():
    return CorpusService.named("perturbed_arrowhead")


@pytest.fixture
def triangle():
    return GeometryService.validate_polygon([(0, 0), (3, 0), (1, 2)])


@pytest.fixture
def pentagon():
    return CorpusService.regular_ngon(5)


@pytest.fixture
def crown():
    return CorpusService.named("crown")


@pytest.fixture
def small_spiral():
    return CorpusService.spiral(turns=1.5, k=12)


@pytest.fixture(scope="session")
def star_shapes():
    return CorpusService.star_corpus(12, seed=100)
