import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gskgl.bifurcation import find_critical, gl_coefficients
from gskgl.model import ModelParams

settings.register_profile(
    "fixed", derandomize=True, max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("fixed")

SEED = 20240917


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def reference_params():
    return ModelParams(a=0.2412, b=0.2, c=0.0, d=0.018)


@pytest.fixture(scope="session")
def critical(reference_params):
    return find_critical(reference_params)


@pytest.fixture(scope="session")
def coeffs(critical):
    return gl_coefficients(critical)
