"""Tests for bitmask subsets and exact enumeration."""

import gc
import itertools
import weakref

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmbench import subsets
from mmbench.errors import TooLargeForExact
from mmbench.generators import SpaceGenerator
from mmbench.subsets import MaskMeasure, SubsetMask, exact_solver, members


def all_masks(n):
    return range(1, 1 << n)


def test_subset_mask_basics():
    """Test construction, membership and hex form."""
    mask = SubsetMask.of([0, 2, 5], 6)
    assert mask.bits == 0b100101
    assert mask.members() == [0, 2, 5]
    assert 2 in mask and 1 not in mask
    assert len(mask) == 3
    assert mask.issubset(SubsetMask.full(6))
    assert mask.hex() == "0x25"
    with pytest.raises(ValueError):
        SubsetMask(1 << 6, 6)


def test_members_order():
    """Test that members are listed in increasing order."""
    assert members(0) == []
    assert members(0b1011) == [0, 1, 3]


def test_mask_measure_matches_sum():
    """Test byte-table masses against direct sums across chunk boundaries."""
    weight = np.random.default_rng(0).uniform(0.1, 1.0, 19)
    mass = MaskMeasure(weight)
    for bits in [0, 1, 0xFF, 0x100, 0x7FFFF, 0x5A5A5]:
        assert mass(bits) == pytest.approx(weight[members(bits)].sum())


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), n=st.integers(1, 8),
       threshold=st.floats(min_value=0.05, max_value=0.95))
def test_heavy_sets_cover_every_heavy_set(seed, n, threshold):
    """Test that every set of mass >= t contains a listed set, and listed sets are heavy."""
    space = SpaceGenerator().random_metric(n, seed=seed)
    solver = exact_solver(space)
    listed = solver.heavy_sets(threshold)
    for bits in listed:
        assert solver.mass(bits) >= threshold - 1e-12
    for bits in all_masks(n):
        if solver.mass(bits) >= threshold - 1e-12:
            assert any(b & ~bits == 0 for b in listed)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), n=st.integers(1, 7),
       r=st.floats(min_value=0.0, max_value=1.0), bound=st.floats(min_value=0.05, max_value=0.95))
def test_light_sets_match_brute_force(seed, n, r, bound):
    """Test that light_sets lists exactly the nonempty B with mu(B_r) <= bound."""
    space = SpaceGenerator().random_metric(n, seed=seed)
    solver = exact_solver(space)
    found = {bits: grown for bits, grown in solver.light_sets(r, bound)}
    expected = set()
    for bits in all_masks(n):
        idx = members(bits)
        grown = np.flatnonzero(space.dist[idx].min(axis=0) <= r + 1e-12)
        if space.weight[grown].sum() <= bound + 1e-12:
            expected.add(bits)
    assert set(found) == expected
    for bits, grown in found.items():
        assert grown == solver.enlarge(bits, r)


def test_exact_limit_and_cache():
    """Test TooLargeForExact and that solvers are shared per space."""
    generator = SpaceGenerator()
    space = generator.cycle(8)
    with pytest.raises(TooLargeForExact) as excinfo:
        exact_solver(space, limit=6)
    assert excinfo.value.details == {"n": 8, "exact_limit": 6}
    assert exact_solver(space) is exact_solver(space)


def test_cache_releases_collected_spaces():
    """Test that a cached solver does not keep its space alive."""
    space = SpaceGenerator().cycle(6)
    gc.collect()
    before = len(subsets._SOLVERS)
    alive = weakref.ref(space)
    solver = exact_solver(space)
    solver.heavy_sets(0.5)
    assert len(subsets._SOLVERS) == before + 1
    del space
    gc.collect()
    assert alive() is None
    assert len(subsets._SOLVERS) == before
    assert solver.n == 6


def test_enlarge_cycle():
    """Test mask enlargement on C_6."""
    solver = exact_solver(SpaceGenerator().cycle(6))
    assert solver.enlarge(0b1, 1.0) == 0b100011
    assert solver.enlarge(0b1, 3.0) == solver.full
    assert [solver.mass(b) for b in itertools.islice(solver.balls(0.0), 2)] == \
        pytest.approx([1 / 6, 1 / 6])
