"""
Shared fixtures for the STA Guard test suite.
"""
import pytest
from fastapi.testclient import TestClient

from sta_guard.config import settings
from sta_guard.engine.ancillary import (
    make_arcsin_eps, make_flat_pi, make_num1_4l, make_num2_4l, make_optimized_2l,
    make_quartic_large_delta, make_ref_3l
)
from sta_guard.main import app

# Published parameter sets keyed by Delta*T
OPTIMIZED_2L = {1.0: {"c0": 1.376, "c1": 14.927}, 3.0: {"c0": 1.266, "c1": 7.873}}
NUM1_4L = {1.0: {"c0": -76.546, "c1": 49.040}, 3.0: {"c0": -76.735, "c1": 46.054}}
NUM2_4L = {1.0: {"d0": 0.794, "d1": -15.633}, 3.0: {"d0": 0.852, "d1": -13.204}}


@pytest.fixture
def client():
    """Test client fixture."""
    with TestClient(app) as test_client:
        yield test_client


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Point settings.output_dir at a temporary directory."""
    monkeypatch.setattr(settings, "output_dir", str(tmp_path))
    return tmp_path


@pytest.fixture
def flat_pi():
    return make_flat_pi(1.0)


@pytest.fixture
def arcsin_eps():
    return make_arcsin_eps(1.0, 0.01)


@pytest.fixture
def quartic():
    return make_quartic_large_delta(1.0)


@pytest.fixture
def optimized_2l():
    return make_optimized_2l(1.0, **OPTIMIZED_2L[1.0])


@pytest.fixture
def ref_3l():
    return make_ref_3l(1.0, 0.002)


@pytest.fixture
def num1_4l():
    return make_num1_4l(1.0, **NUM1_4L[1.0])


@pytest.fixture
def num2_4l():
    return make_num2_4l(1.0, **NUM2_4L[3.0])
