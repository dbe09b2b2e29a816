import pytest

from oscillab import KernelSpec
from oscillab.hermite_core import (
    construct_rank_2_bounded,
    construct_rank_m,
    pure_hermite,
)


@pytest.fixture(scope="session")
def kernel_m1():
    return KernelSpec(m=1, h0=0.75)


@pytest.fixture(scope="session")
def kernel_m2():
    return KernelSpec(m=2, h0=0.9)


@pytest.fixture(scope="session")
def phi_h1():
    return pure_hermite(1)


@pytest.fixture(scope="session")
def phi_rank1():
    return construct_rank_m(1, a_star=1.0)


@pytest.fixture(scope="session")
def phi_rank2():
    return construct_rank_2_bounded(1.0)
