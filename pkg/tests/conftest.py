"""Shared spaces for the test suite."""

import pytest

from mmbench.generators import SpaceGenerator
from mmbench.space import validate_space


@pytest.fixture
def single_point():
    return validate_space([[0.0]], [1.0])


@pytest.fixture
def two_point():
    return validate_space([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5])


@pytest.fixture
def cycle6():
    return SpaceGenerator().cycle(6)


@pytest.fixture
def generator():
    return SpaceGenerator()
