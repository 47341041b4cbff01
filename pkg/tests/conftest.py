import random

import pytest

from cartan import IdealPresentation, free_ring, quotient_ring
from cartan.expr import Gen


@pytest.fixture
def rng():
    return random.Random(20240817)


@pytest.fixture
def plane():
    return free_ring(2, ["x", "y"])


@pytest.fixture
def space():
    return free_ring(3, ["x", "y", "z"])


@pytest.fixture
def cross_ideal():
    return IdealPresentation((Gen(0) * Gen(1),))


@pytest.fixture
def cross_ring():
    return quotient_ring(2, [Gen(0) * Gen(1)], ["x", "y"])
