import numpy as np
import pytest

from mtbbm.models import model_a, model_b, model_c
from mtbbm.spectral import spectral_data


@pytest.fixture(scope="session")
def spec_a():
    return model_a()


@pytest.fixture(scope="session")
def spec_b():
    return model_b()


@pytest.fixture(scope="session")
def spec_c():
    return model_c()


@pytest.fixture(scope="session")
def sd_a(spec_a):
    return spectral_data(spec_a)


@pytest.fixture(scope="session")
def sd_b(spec_b):
    return spectral_data(spec_b)


@pytest.fixture(scope="session")
def sd_c(spec_c):
    return spectral_data(spec_c)


@pytest.fixture(scope="session")
def model_c_exact():
    """Hand eigensolve of the asymmetric two-type model: the characteristic
    polynomial is lambda^2 + 3 lambda - 1."""
    lam = (-3.0 + np.sqrt(13.0)) / 2.0
    g = np.array([1.0, (1.0 + lam) / 2.0])
    g = g / g.sum()
    h = np.array([1.0, (1.0 + lam) / 1.5])
    h = h / float(g @ h)
    return lam, g, h
