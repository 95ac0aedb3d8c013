import pytest

from pricing_lab.generators import gen_loggap, gen_table1, gen_table1_single


@pytest.fixture
def table1():
    return gen_table1()


@pytest.fixture
def table1_single():
    return gen_table1_single()


@pytest.fixture
def loggap2():
    return gen_loggap(2)
