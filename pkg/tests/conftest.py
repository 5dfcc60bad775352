import numpy as np
import pytest

from neutral_inclusions import EllipsoidSpec, MaterialPair


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def triaxial():
    return EllipsoidSpec(1.0, 2.0, 3.0, 1.0, 4.0)


@pytest.fixture
def hs_sphere():
    # theta1 = 1/2
    return EllipsoidSpec.from_sphere_radii(0.5 ** (1 / 3), 1.0)


@pytest.fixture
def linear_pair():
    return MaterialPair(10.0, 1.0)


def random_spec(rng, max_ratio=10.0):
    c = np.sort(rng.uniform(1.0, max_ratio, 3))
    rho_c = rng.uniform(0.05, 2.0) * c[0] ** 2
    rho_e = rho_c + rng.uniform(0.1, 5.0) * c[0] ** 2
    return EllipsoidSpec(*c, rho_c, rho_e)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
