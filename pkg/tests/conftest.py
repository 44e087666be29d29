import numpy as np
import pytest

from pcctab.datasets import christensen_abortion, wermuth_cox
from pcctab.table import SparseTable


@pytest.fixture(scope="session")
def wermuth():
    return wermuth_cox()


@pytest.fixture(scope="session")
def wermuth_table(wermuth):
    return wermuth[1]


@pytest.fixture(scope="session")
def christensen():
    return christensen_abortion()


@pytest.fixture(scope="session")
def christensen_table(christensen):
    return christensen[1]


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)


def table_from_dense(arr):
    return SparseTable.from_dense(np.asarray(arr, dtype=float))


@pytest.fixture()
def from_dense():
    return table_from_dense
