import numpy as np
import pytest

from powergp.problem_io import load_example1


@pytest.fixture(scope="session")
def example1():
    return load_example1()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
