"""Tests for the Gromov and Ledoux expansion coefficients."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmbench.expansion import (
    discrete_poincare_diagnostic,
    exp_gromov,
    exp_ledoux,
    gradient_surrogate,
    gromov_monotonicity_check,
    iterated_ledoux_check,
    ledoux_doubling_bound_check,
    poincare_report,
)
from mmbench.generators import SpaceGenerator
from mmbench.lipschitz import LipschitzFunction
from mmbench.reports import count_failures
from mmbench.subsets import members


def enlarged_mass(space, idx, rho):
    reach = space.dist[idx].min(axis=0)
    return space.weight[reach <= rho + 1e-12].sum()


def brute_gromov(space, epsilon, rho):
    best = np.inf
    for bits in range(1, 1 << space.n):
        idx = members(bits)
        if space.weight[idx].sum() >= epsilon - 1e-12:
            best = min(best, enlarged_mass(space, idx, rho) / epsilon)
    return max(1.0, best)


def brute_ledoux(space, epsilon, rho):
    best = None
    for bits in range(1, 1 << space.n):
        idx = members(bits)
        grown = enlarged_mass(space, idx, rho)
        if grown <= epsilon + 1e-12:
            ratio = grown / space.weight[idx].sum()
            best = ratio if best is None else min(best, ratio)
    return best


def test_cycle_coefficients(cycle6):
    """Test Exp_G(1/2, 1) = 5/3 and Exp_L(1/2, 1) = 3 on C_6."""
    gromov = exp_gromov(cycle6, 0.5, 1.0)
    assert gromov.value == pytest.approx(5 / 3)
    assert len(gromov.witness) == 3
    ledoux = exp_ledoux(cycle6, 0.5, 1.0)
    assert ledoux.value == pytest.approx(3.0)
    assert len(ledoux.witness) == 1
    assert ledoux.informative


def test_two_point_coefficients(two_point):
    """Test the trivial Gromov value and an unbounded Ledoux value."""
    assert exp_gromov(two_point, 0.5, 0.5).value == pytest.approx(1.0)
    ledoux = exp_ledoux(two_point, 0.4, 0.5)
    assert ledoux.unbounded
    assert not ledoux.informative
    assert ledoux.to_dict()["value"] == "unbounded"
    assert ledoux.to_dict()["witness"] is None


def test_radius_beyond_diameter(cycle6):
    """Test Exp_G = 1/eps and Exp_L unbounded once rho >= diam."""
    assert exp_gromov(cycle6, 0.4, 3.0).value == pytest.approx(2.5)
    assert exp_ledoux(cycle6, 0.4, 3.0).unbounded


def test_argument_errors(cycle6):
    """Test epsilon and rho ranges."""
    with pytest.raises(ValueError):
        exp_gromov(cycle6, 0.0, 1.0)
    with pytest.raises(ValueError):
        exp_ledoux(cycle6, 0.5, 0.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 8),
       epsilon=st.floats(min_value=0.05, max_value=0.95),
       rho=st.floats(min_value=0.05, max_value=1.5))
def test_coefficients_match_brute_force(seed, n, epsilon, rho):
    """Test both coefficients against enumeration of all subsets."""
    space = SpaceGenerator().random_metric(n, seed=seed)
    assert exp_gromov(space, epsilon, rho).value == pytest.approx(brute_gromov(space, epsilon, rho))
    expected = brute_ledoux(space, epsilon, rho)
    result = exp_ledoux(space, epsilon, rho)
    if expected is None:
        assert result.unbounded
    else:
        assert result.value == pytest.approx(max(1.0, expected))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 8))
def test_gromov_nondecreasing_in_rho(seed, n):
    """Test that larger radii never lower Exp_G."""
    space = SpaceGenerator().random_metric(n, seed=seed)
    values = [exp_gromov(space, 0.5, rho).value for rho in (0.1, 0.3, 0.6, 1.2)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_iterated_ledoux(generator):
    """Test Exp_L^k mu(B) <= mu(B_k rho) on C_12."""
    report = iterated_ledoux_check(generator.cycle(12), 0.5, 1.0, kmax=2)
    assert report.passed
    assert report.witnesses["k"] in (1, 2)


def test_iterated_ledoux_unbounded(two_point):
    """Test that an unbounded coefficient skips the check."""
    report = iterated_ledoux_check(two_point, 0.4, 0.5)
    assert report.status == "skip"


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 8),
       rho=st.floats(min_value=0.05, max_value=0.5))
def test_iterated_and_monotonicity_hold(seed, n, rho):
    """Test the iterated bound and Lipschitz monotonicity on random spaces."""
    space = SpaceGenerator().random_metric(n, seed=seed)
    assert iterated_ledoux_check(space, 0.5, rho).passed is not False
    f = LipschitzFunction.on(space, np.random.default_rng(seed).normal(size=n))
    assert gromov_monotonicity_check(space, f, 0.5, rho).passed


def test_monotonicity_constant_function(cycle6):
    """Test that constant maps are skipped."""
    f = LipschitzFunction.on(cycle6, np.ones(6))
    assert gromov_monotonicity_check(cycle6, f, 0.5, 1.0).status == "skip"


def test_ledoux_doubling_bound(generator, two_point):
    """Test Exp_L <= C on C_12 and the vacuous case on two points."""
    report = ledoux_doubling_bound_check(generator.cycle(12), 0.5, 1.0)
    assert report.passed
    assert report.lhs == pytest.approx(1.5)
    assert report.rhs == pytest.approx(3.0)
    assert ledoux_doubling_bound_check(two_point, 0.4, 0.5).status == "skip"


def test_poincare_two_point(two_point):
    """Test Var f = C |grad f|^2 at C = 1/4 for f = (0, 1)."""
    values = np.array([0.0, 1.0])
    assert gradient_surrogate(two_point, values).tolist() == [1.0, 1.0]
    report = poincare_report(two_point, values, 0.25, "f")
    assert report.passed
    assert report.diagnostic
    assert report.lhs == pytest.approx(0.25)


def test_poincare_diagnostic_never_gates(cycle6):
    """Test that a tiny constant fails reports without counting as failures."""
    reports = discrete_poincare_diagnostic(cycle6, 1e-3, budget=3)
    assert len(reports) == 1 + 6 + 3
    assert any(r.passed is False for r in reports)
    assert count_failures(reports) == 0
    with pytest.raises(ValueError):
        discrete_poincare_diagnostic(cycle6, 0.0)
