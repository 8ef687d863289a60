"""Closed-form sides of the concentration, expansion and diameter inequalities.

Every evaluator checks its hypotheses and raises HypothesisViolated naming the
failing clause. Exp_L arguments are Ledoux coefficients at level 1 - eps unless
the parameter name says otherwise.
"""

import math
from typing import List, NamedTuple, Tuple

from .concentration import ProfileFit
from .errors import HypothesisViolated, NotInformative
from .observable import laplace_lower

DEFAULT_TAU = 1.0 / 3.0


def _require(condition: bool, clause: str, **details) -> None:
    if not condition:
        raise HypothesisViolated(f"hypothesis failed: {clause}", {"clause": clause, **details})


def rhs_concentration_ledoux(epsilon: float, exp_l: float, rho: float, r: float) -> float:
    """(1 - eps) Exp_L^(1 - r/rho), dominating alpha^eps(r)."""
    _require(exp_l > 1.0, "Exp_L > 1", exp_l=exp_l)
    _require(0.0 < rho <= r, "0 < rho <= r", rho=rho, r=r)
    return (1.0 - epsilon) * exp_l ** (1.0 - r / rho)


def rhs_concentration_gromov_ledoux(epsilon: float, exp_g: float, exp_l: float,
                                    rho: float, r: float) -> float:
    """(1 - eps) Exp_G Exp_L^(2 - r/rho)."""
    _require(exp_l > 1.0, "Exp_L > 1", exp_l=exp_l)
    _require(0.0 < rho <= r, "0 < rho <= r", rho=rho, r=r)
    return (1.0 - epsilon) * exp_g * exp_l ** (2.0 - r / rho)


def _answer_hypotheses(kappa: float, epsilon: float, exp_l: float) -> None:
    _require(exp_l > 1.0, "Exp_L > 1", exp_l=exp_l)
    _require(epsilon <= 0.5, "eps <= 1/2", epsilon=epsilon)
    _require(0.0 < kappa < 1.0, "0 < kappa < 1", kappa=kappa)


def gromov_answer_lower(kappa: float, epsilon: float, rho: float, exp_l: float,
                        obsdiam: float) -> float:
    """kappa exp(ObsDiam ln Exp_L / 2 rho) / (2 (1 - eps) Exp_L^2), a lower bound on Exp_G.

    Nondecreasing in obsdiam, so a lower estimate of ObsDiam keeps it valid.
    """
    _answer_hypotheses(kappa, epsilon, exp_l)
    return (kappa * math.exp(obsdiam * math.log(exp_l) / (2.0 * rho))
            / (2.0 * (1.0 - epsilon) * exp_l ** 2))


def gromov_upper_hypothesis(kappa: float, epsilon: float, exp_g: float,
                            exp_l: float) -> Tuple[bool, List[str]]:
    """2 (1 - Exp_G eps) Exp_L >= kappa, with the reasons it fails."""
    reasons = []
    if exp_l <= 1.0:
        reasons.append("Exp_L > 1")
    if epsilon > 0.5:
        reasons.append("eps <= 1/2")
    if 2.0 * (1.0 - exp_g * epsilon) * exp_l < kappa:
        reasons.append("2 (1 - Exp_G eps) Exp_L >= kappa")
    return not reasons, reasons


def gromov_upper(kappa: float, epsilon: float, rho: float, exp_l: float, obsdiam: float) -> float:
    """(2 - kappa exp((ObsDiam - 4 rho) ln Exp_L / 2 rho)) / (2 eps), an upper bound on Exp_G.

    Nonincreasing in obsdiam, so a lower estimate of ObsDiam keeps it valid.
    """
    _answer_hypotheses(kappa, epsilon, exp_l)
    return ((2.0 - kappa * math.exp((obsdiam - 4.0 * rho) * math.log(exp_l) / (2.0 * rho)))
            / (2.0 * epsilon))


def obsdiam_upper_by_ledoux(kappa: float, epsilon: float, rho: float, exp_l: float) -> float:
    """(2 rho / ln Exp_L) ln(2 Exp_L^2 (1 - eps) / ((1 + Exp_L^2) eps kappa))."""
    _answer_hypotheses(kappa, epsilon, exp_l)
    argument = 2.0 * exp_l ** 2 * (1.0 - epsilon) / ((1.0 + exp_l ** 2) * epsilon * kappa)
    if argument < 1.0:
        raise NotInformative(f"logarithm argument {argument!r} is below 1", {"argument": argument})
    return 2.0 * rho * math.log(argument) / math.log(exp_l)


def obsdiam_upper_by_answer(kappa: float, epsilon: float, rho: float, exp_l: float) -> float:
    """(2 rho / ln Exp_L) ln(2 (1 - eps) Exp_L^2 / (eps kappa)).

    gromov_answer_lower solved for ObsDiam using Exp_G <= 1/eps.
    """
    _answer_hypotheses(kappa, epsilon, exp_l)
    argument = 2.0 * (1.0 - epsilon) * exp_l ** 2 / (epsilon * kappa)
    return 2.0 * rho * math.log(argument) / math.log(exp_l)


class DiameterUpper(NamedTuple):
    value: float
    branch_large_ball: float
    branch_small_ball: float


def diameter_upper(constant: float, epsilon: float, rho: float, exp_l_eps: float,
                   exp_l_complement: float, tau: float = DEFAULT_TAU) -> DiameterUpper:
    """Diameter bound from the doubling constant and both Ledoux coefficients.

    exp_l_complement is Exp_L(1 - eps, rho), exp_l_eps is Exp_L(eps, rho).
    The first branch covers mu(B(x, tau diam)) >= eps, the second the opposite case.
    """
    _require(min(exp_l_eps, exp_l_complement) > 1.0, "both Exp_L > 1",
             exp_l_eps=exp_l_eps, exp_l_complement=exp_l_complement)
    _require(epsilon <= 0.5, "eps <= 1/2", epsilon=epsilon)
    _require(constant >= 1.0, "C >= 1", constant=constant)
    _require(0.0 < tau <= DEFAULT_TAU, "0 < tau <= 1/3", tau=tau)
    doubling_exponent = math.log(constant) / math.log(2.0)
    large = (rho * math.log(constant ** 4 * (1.0 - epsilon) / epsilon * exp_l_complement)
             / (tau * math.log(exp_l_complement)))
    small = (2.0 * rho * math.log(constant ** 3 * tau ** (-doubling_exponent) * epsilon * exp_l_eps)
             / (tau * math.log(exp_l_eps)))
    return DiameterUpper(max(large, small), large, small)


def diameter_lower_from_laplace(lam: float, laplace: float) -> float:
    """(1/lam) min(ln Lap, sqrt(2 ln Lap)); Lap may be any lower estimate."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    log_lap = math.log(max(1.0, laplace))
    return min(log_lap, math.sqrt(2.0 * log_lap)) / lam


def diameter_lower(space, lam: float, budget: int = 20, seed: int = 0) -> float:
    return diameter_lower_from_laplace(lam, laplace_lower(space, lam, budget, seed).lower)


def obsdiam_upper_from_fit(fit: ProfileFit, kappa: float) -> float:
    """ObsDiam bound from an envelope of alpha^(1/2)."""
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    log_term = max(0.0, math.log(2.0 * fit.C1 / kappa))
    if fit.kind == "exponential":
        return 2.0 * log_term / fit.C2
    return 2.0 * math.sqrt(log_term / fit.C2)


def sphere_envelope(n: int, delta: float, r: float) -> float:
    """Gaussian concentration of the n-sphere of radius delta."""
    return math.sqrt(math.pi / 8.0) * math.exp(-(n - 1) * r * r / (2.0 * delta * delta))


def levy_sphere_obsdiam(n: int, delta: float, kappa: float) -> float:
    fit = ProfileFit("gaussian", math.sqrt(math.pi / 8.0), (n - 1) / (2.0 * delta * delta), 0.0)
    return obsdiam_upper_from_fit(fit, kappa)


def gromov_milman_envelope(lambda1: float, r: float) -> float:
    """(3/4) exp(-sqrt(lambda1) ln(3/2) r) for a compact manifold with spectral gap lambda1."""
    return 0.75 * math.exp(-math.sqrt(lambda1) * math.log(1.5) * r)


def gromov_milman_obsdiam(lambda1: float, kappa: float) -> float:
    """2 ln(3 / 2 kappa) / (ln(3/2) sqrt(lambda1))."""
    return 2.0 * math.log(1.5 / kappa) / (math.log(1.5) * math.sqrt(lambda1))


def ledoux_spectral_lower(lambda1: float, epsilon: float, rho: float) -> float:
    """1 + lambda1 eps rho^2, a lower bound on Exp_L(1 - eps, rho) for manifolds."""
    return 1.0 + lambda1 * epsilon * rho * rho


def manifold_gromov_lower(n: int, lambda1: float, epsilon: float, rho: float, kappa: float,
                          obsdiam: float) -> float:
    """Exp_G lower bound for an n-manifold with Ric >= 0, Exp_L bracketed by 1 + lambda1 eps rho^2 and 2^n."""
    growth = math.log(ledoux_spectral_lower(lambda1, epsilon, rho))
    return kappa * math.exp(obsdiam * growth / (2.0 * rho)) / (2.0 ** (2 * n + 1) * (1.0 - epsilon))


def manifold_obsdiam_upper(n: int, lambda1: float, epsilon: float, rho: float, kappa: float) -> float:
    lower_l = ledoux_spectral_lower(lambda1, epsilon, rho)
    scale = 2.0 * rho / math.log(lower_l)
    doubling = math.log(2.0 ** (2 * n + 1) * (1.0 - epsilon) / ((1.0 + lower_l ** 2) * epsilon * kappa))
    plain = math.log(2.0 * (1.0 - epsilon) / (epsilon * kappa))
    return scale * min(doubling, plain)


def manifold_diameter_upper(n: int, lambda1: float, epsilon: float, rho: float) -> float:
    large = (math.log(2.0 ** (5 * n) * (1.0 - epsilon) / epsilon)
             / math.log(ledoux_spectral_lower(lambda1, epsilon, rho)))
    small = (2.0 * math.log(2.0 ** (4 * n) * 3.0 ** n * epsilon)
             / math.log(1.0 + lambda1 * (1.0 - epsilon) * rho * rho))
    return 3.0 * rho * max(large, small)
