import numpy as np
import pytest

from solitonlab.geometry import make_background
from solitonlab.invariants import find_soliton_field


def p1_perturbation(x):
    return 0.25 * np.sin(2.0 * x) + 0.12 * np.cos(1.3 * x)


@pytest.fixture(scope="session")
def p1():
    return make_background("p1_radial", 64, kappa=0.0)


@pytest.fixture(scope="session")
def p1_k1():
    return make_background("p1_radial", 64, kappa=1.0)


@pytest.fixture(scope="session")
def p1_pert():
    return make_background("p1_radial", 64, kappa=0.0, perturbation=p1_perturbation)


@pytest.fixture(scope="session")
def calabi():
    return make_background("calabi_fiber", 96, kappa=0.0)


@pytest.fixture(scope="session")
def calabi_k(calabi):
    return make_background("calabi_fiber", 96, kappa=-0.5)


@pytest.fixture(scope="session")
def kappa_star(calabi):
    return find_soliton_field(calabi)


@pytest.fixture(scope="session")
def calabi_star(kappa_star):
    return make_background("calabi_fiber", 96, kappa=kappa_star)
