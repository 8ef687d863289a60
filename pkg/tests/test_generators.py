"""Tests for the canonical space generators."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmbench.errors import SizeOverflow
from mmbench.generators import SpaceGenerator, generate


def test_cycle_distances(generator):
    """Test the shortest-path metric on C_6."""
    space = generator.cycle(6)
    assert space.dist[0].tolist() == [0, 1, 2, 3, 2, 1]
    assert space.diameter == 3.0
    assert np.allclose(space.weight, 1 / 6)


def test_path_and_hypercube(generator):
    """Test path and Hamming cube metrics."""
    path = generator.path(4)
    assert path.dist[0, 3] == 3.0
    cube = generator.hypercube(3)
    assert cube.n == 8
    assert cube.diameter == 3.0
    assert cube.dist[0b101, 0b011] == 2.0


def test_hypercube_zero_is_single_point(generator):
    """Test that {0,1}^0 is a single point."""
    assert generator.hypercube(0).n == 1


def test_size_overflow():
    """Test that oversized requests raise SizeOverflow."""
    with pytest.raises(SizeOverflow) as excinfo:
        SpaceGenerator(max_points=100).hypercube(7)
    assert excinfo.value.details["n"] == 128
    with pytest.raises(SizeOverflow):
        SpaceGenerator(max_points=10).cycle(11)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=1, max_value=12), seed=st.integers(min_value=0, max_value=10_000))
def test_random_metric_is_valid_and_seeded(n, seed):
    """Test that random metrics satisfy the triangle inequality and repeat per seed."""
    generator = SpaceGenerator()
    first = generator.random_metric(n, seed=seed)
    second = generator.random_metric(n, seed=seed)
    assert np.array_equal(first.dist, second.dist)
    assert np.array_equal(first.weight, second.weight)
    d = first.dist
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-12)


def test_sampled_sphere(generator):
    """Test that sampled sphere distances are geodesic on S^2(delta)."""
    space = generator.sampled_sphere(2, 0.5, 50, seed=1)
    assert space.n == 50
    assert space.diameter <= np.pi * 0.5 + 1e-12


def test_from_spec(generator):
    """Test parsing of kind strings."""
    assert generator.from_spec("cycle:5").n == 5
    assert generator.from_spec("hypercube:2").n == 4
    assert generate("random:6", seed=2).n == 6
    with pytest.raises(ValueError, match="Unknown space kind"):
        generator.from_spec("torus:3")
    with pytest.raises(ValueError, match="Missing size"):
        generator.from_spec("cycle")
