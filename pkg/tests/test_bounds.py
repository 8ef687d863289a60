"""Tests for the closed-form sides of the theorem inequalities."""

import math

import pytest

from mmbench.bounds import (
    diameter_lower,
    diameter_lower_from_laplace,
    diameter_upper,
    gromov_answer_lower,
    gromov_milman_envelope,
    gromov_milman_obsdiam,
    gromov_upper,
    gromov_upper_hypothesis,
    ledoux_spectral_lower,
    levy_sphere_obsdiam,
    manifold_diameter_upper,
    manifold_gromov_lower,
    manifold_obsdiam_upper,
    obsdiam_upper_by_answer,
    obsdiam_upper_by_ledoux,
    obsdiam_upper_from_fit,
    rhs_concentration_gromov_ledoux,
    rhs_concentration_ledoux,
    sphere_envelope,
)
from mmbench.concentration import ProfileFit
from mmbench.errors import HypothesisViolated


def test_rhs_concentration_ledoux():
    """Test (1 - eps) Exp_L^(1 - r/rho)."""
    assert rhs_concentration_ledoux(0.5, 3.0, 1.0, 2.0) == pytest.approx(1 / 6)
    assert rhs_concentration_ledoux(0.5, 3.0, 1.0, 3.0) == pytest.approx(1 / 18)
    assert rhs_concentration_ledoux(0.3, 2.0, 1.0, 1.0) == pytest.approx(0.7)


def test_rhs_concentration_gromov_ledoux():
    """Test (1 - eps) Exp_G Exp_L^(2 - r/rho)."""
    assert rhs_concentration_gromov_ledoux(0.5, 5 / 3, 3.0, 1.0, 2.0) == pytest.approx(5 / 6)
    assert rhs_concentration_gromov_ledoux(0.5, 5 / 3, 3.0, 1.0, 4.0) == pytest.approx(5 / 54)
    assert rhs_concentration_gromov_ledoux(0.25, 1.0, 2.0, 0.5, 1.0) == pytest.approx(0.75)


def test_concentration_hypotheses():
    """Test that the failing clause is named."""
    with pytest.raises(HypothesisViolated) as excinfo:
        rhs_concentration_ledoux(0.5, 1.0, 1.0, 2.0)
    assert excinfo.value.details["clause"] == "Exp_L > 1"
    with pytest.raises(HypothesisViolated) as excinfo:
        rhs_concentration_gromov_ledoux(0.5, 1.0, 3.0, 2.0, 1.0)
    assert excinfo.value.details["clause"] == "0 < rho <= r"


def test_gromov_answer_lower():
    """Test the lower bound on Exp_G."""
    assert gromov_answer_lower(0.5, 0.5, 1.0, 3.0, 2.0) == pytest.approx(1 / 6)
    assert gromov_answer_lower(0.1, 0.25, 1.0, 2.0, 4.0) == pytest.approx(0.4 / 6)
    assert gromov_answer_lower(0.2, 0.5, 1.0, 3.0, 0.0) == pytest.approx(0.2 / 9)
    with pytest.raises(HypothesisViolated):
        gromov_answer_lower(0.5, 0.6, 1.0, 3.0, 2.0)


def test_gromov_upper():
    """Test the upper bound on Exp_G and its hypothesis."""
    assert gromov_upper(0.5, 0.5, 1.0, 3.0, 2.0) == pytest.approx(11 / 6)
    assert gromov_upper(0.2, 0.25, 1.0, 2.0, 6.0) == pytest.approx(3.2)
    assert gromov_upper(0.3, 0.5, 1.0, 3.0, 4.0) == pytest.approx(1.7)
    ok, reasons = gromov_upper_hypothesis(0.5, 0.5, 5 / 3, 3.0)
    assert ok and reasons == []
    ok, reasons = gromov_upper_hypothesis(0.5, 0.5, 2.0, 3.0)
    assert not ok
    assert reasons == ["2 (1 - Exp_G eps) Exp_L >= kappa"]


def test_obsdiam_upper_by_ledoux():
    """Test the ObsDiam bound in terms of Exp_L."""
    assert obsdiam_upper_by_ledoux(0.5, 0.5, 1.0, 3.0) == pytest.approx(2 / math.log(3) * math.log(3.6))
    assert obsdiam_upper_by_ledoux(0.5, 0.5, 1.0, 3.0) == pytest.approx(2.332, abs=1e-3)
    assert obsdiam_upper_by_ledoux(0.1, 0.25, 0.5, 2.0) == pytest.approx(5.585, abs=1e-3)
    with pytest.raises(HypothesisViolated):
        obsdiam_upper_by_ledoux(0.5, 0.5, 1.0, 1.0)


def test_obsdiam_upper_by_answer():
    """Test the bound obtained from the Exp_G lower bound and Exp_G <= 1/eps."""
    value = obsdiam_upper_by_answer(0.5, 0.5, 1.0, 3.0)
    assert value == pytest.approx(2 * math.log(36) / math.log(3))
    assert value >= obsdiam_upper_by_ledoux(0.5, 0.5, 1.0, 3.0)
    # the ObsDiam that saturates the lower bound gives Exp_G exactly 1/eps
    assert gromov_answer_lower(0.5, 0.5, 1.0, 3.0, value) == pytest.approx(2.0)


def test_diameter_upper():
    """Test both branches of the diameter bound."""
    result = diameter_upper(2.0, 0.5, 1.0, 3.0, 3.0)
    assert result.branch_large_ball == pytest.approx(3 * math.log(48) / math.log(3))
    assert result.branch_large_ball == pytest.approx(10.57, abs=0.01)
    assert result.branch_small_ball == pytest.approx(6 * math.log(36) / math.log(3))
    assert result.branch_small_ball == pytest.approx(19.57, abs=0.01)
    assert result.value == result.branch_small_ball


def test_diameter_upper_collapsed_constant():
    """Test that C = 1 removes the doubling powers."""
    result = diameter_upper(1.0, 0.25, 1.0, 2.0, 2.0)
    assert result.branch_large_ball == pytest.approx(3 * math.log(3 * 2.0) / math.log(2.0))


def test_diameter_upper_hypotheses():
    """Test the clauses of the diameter bound."""
    with pytest.raises(HypothesisViolated):
        diameter_upper(2.0, 0.5, 1.0, 1.0, 3.0)
    with pytest.raises(HypothesisViolated):
        diameter_upper(0.5, 0.5, 1.0, 3.0, 3.0)
    with pytest.raises(HypothesisViolated):
        diameter_upper(2.0, 0.5, 1.0, 3.0, 3.0, tau=0.5)


def test_diameter_lower(two_point, single_point, cycle6):
    """Test the Laplace diameter bound."""
    assert diameter_lower_from_laplace(1.0, math.cosh(0.5)) == pytest.approx(math.log(math.cosh(0.5)))
    assert diameter_lower(two_point, 1.0, budget=3) == pytest.approx(0.1201, abs=1e-4)
    assert diameter_lower(single_point, 1.0, budget=3) == 0.0
    assert 0.0 < diameter_lower(cycle6, 2.0, budget=3) <= 3.0
    assert diameter_lower_from_laplace(1.0, 0.5) == 0.0
    with pytest.raises(ValueError):
        diameter_lower_from_laplace(0.0, 2.0)


def test_obsdiam_from_fit():
    """Test the corollary formulas for exponential and gaussian envelopes."""
    exponential = ProfileFit("exponential", 1.0, 2.0, 0.0)
    assert obsdiam_upper_from_fit(exponential, 0.1) == pytest.approx(math.log(20.0))
    gaussian = ProfileFit("gaussian", 1.0, 2.0, 0.0)
    assert obsdiam_upper_from_fit(gaussian, 0.1) == pytest.approx(2 * math.sqrt(math.log(20.0) / 2))
    with pytest.raises(ValueError):
        obsdiam_upper_from_fit(exponential, 1.0)


def test_sphere_formulas():
    """Test the sphere envelope and the Levy bound."""
    assert sphere_envelope(2, 1.0, 0.0) == pytest.approx(math.sqrt(math.pi / 8))
    assert sphere_envelope(3, 1.0, 1.0) == pytest.approx(math.sqrt(math.pi / 8) * math.exp(-1.0))
    expected = 2 * math.sqrt(2 / 2 * math.log(math.sqrt(math.pi / 2) / 0.1))
    assert levy_sphere_obsdiam(3, 1.0, 0.1) == pytest.approx(expected)


def test_gromov_milman_formulas():
    """Test that the closed form matches the fit corollary for (3/4, sqrt(lambda1) ln 3/2)."""
    lambda1 = 4.0
    fit = ProfileFit("exponential", 0.75, math.sqrt(lambda1) * math.log(1.5), 0.0)
    assert gromov_milman_obsdiam(lambda1, 0.2) == pytest.approx(obsdiam_upper_from_fit(fit, 0.2))
    assert gromov_milman_envelope(lambda1, 1.0) == pytest.approx(fit.envelope(1.0))


def test_manifold_formulas():
    """Test the Riemannian evaluators stay consistent with each other."""
    assert ledoux_spectral_lower(2.0, 0.25, 1.0) == pytest.approx(1.5)
    n, lambda1, epsilon, rho, kappa = 2, 2.0, 0.25, 1.0, 0.1
    upper = manifold_obsdiam_upper(n, lambda1, epsilon, rho, kappa)
    plain = 2 * rho / math.log(1.5) * math.log(2 * 0.75 / (0.25 * 0.1))
    assert upper <= plain + 1e-12
    lower = manifold_gromov_lower(n, lambda1, epsilon, rho, kappa, 0.0)
    assert lower == pytest.approx(kappa / (2 ** 5 * 0.75))
    assert manifold_diameter_upper(n, lambda1, epsilon, rho) > 0.0
