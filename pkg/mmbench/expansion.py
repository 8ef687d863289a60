"""Exact Gromov and Ledoux expansion coefficients and their structural checks.

Both coefficients are read as the guaranteed ratio over every qualifying set:

    Exp_G(eps, rho) = min { mu(A_rho) / eps : mu(A) >= eps }
    Exp_L(eps, rho) = min { mu(B_rho) / mu(B) : B nonempty, mu(B_rho) <= eps }

Exp_L is unbounded when no nonempty B qualifies; that is reported as value None.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .enlargement import ball_masses, doubling_constant
from .lipschitz import LipschitzFunction, image_space, lipschitz_constant
from .reports import BoundReport
from .space import MASS_TOL, FiniteMetricMeasureSpace, diameter
from .subsets import DEFAULT_EXACT_LIMIT, SubsetMask, exact_solver

logger = logging.getLogger(__name__)

UNBOUNDED = "unbounded"


@dataclass
class ExpansionResult:
    kind: str
    epsilon: float
    rho: float
    value: Optional[float]
    witness: Optional[SubsetMask] = None

    @property
    def unbounded(self) -> bool:
        return self.value is None

    @property
    def informative(self) -> bool:
        """Finite and strictly above 1, as the exponential bounds require."""
        return self.value is not None and self.value > 1.0

    def to_dict(self) -> dict:
        return {
            'kind': self.kind,
            'epsilon': self.epsilon,
            'rho': self.rho,
            'value': UNBOUNDED if self.value is None else self.value,
            'witness': self.witness.hex() if self.witness is not None else None,
        }


def _check(epsilon: float, rho: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")


def exp_gromov(space: FiniteMetricMeasureSpace, epsilon: float, rho: float,
               limit: int = DEFAULT_EXACT_LIMIT) -> ExpansionResult:
    _check(epsilon, rho)
    solver = exact_solver(space, limit)
    best, witness = np.inf, solver.full
    for bits in solver.heavy_sets(epsilon):
        grown = solver.mass(solver.enlarge(bits, rho))
        if grown < best - MASS_TOL:
            best, witness = grown, bits
    value = max(1.0, best / epsilon)
    logger.debug("Exp_G(%r, %r) = %r", epsilon, rho, value)
    return ExpansionResult("gromov", epsilon, rho, value, SubsetMask(witness, space.n))


def exp_ledoux(space: FiniteMetricMeasureSpace, epsilon: float, rho: float,
               limit: int = DEFAULT_EXACT_LIMIT) -> ExpansionResult:
    _check(epsilon, rho)
    solver = exact_solver(space, limit)
    best, witness = np.inf, None
    for bits, grown in solver.light_sets(rho, epsilon):
        ratio = solver.mass(grown) / solver.mass(bits)
        if ratio < best - MASS_TOL:
            best, witness = ratio, bits
    if witness is None:
        logger.debug("Exp_L(%r, %r) unbounded", epsilon, rho)
        return ExpansionResult("ledoux", epsilon, rho, None)
    value = max(1.0, best)
    logger.debug("Exp_L(%r, %r) = %r", epsilon, rho, value)
    return ExpansionResult("ledoux", epsilon, rho, value, SubsetMask(witness, space.n))


def iterated_ledoux_check(space: FiniteMetricMeasureSpace, epsilon: float, rho: float,
                          kmax: int = 3, limit: int = DEFAULT_EXACT_LIMIT) -> BoundReport:
    """Exp_L^k mu(B) <= mu(B_{k rho}) for every nonempty B with mu(B_{k rho}) <= eps."""
    inputs = {'epsilon': epsilon, 'rho': rho, 'kmax': kmax}
    result = exp_ledoux(space, epsilon, rho, limit)
    if result.unbounded:
        return BoundReport.skipped("iterated_ledoux", "Exp_L is unbounded", inputs=inputs)
    solver = exact_solver(space, limit)
    worst = None
    for k in range(1, kmax + 1):
        for bits, grown in solver.light_sets(k * rho, epsilon):
            lhs = result.value ** k * solver.mass(bits)
            rhs = solver.mass(grown)
            if worst is None or rhs - lhs < worst[1] - worst[0]:
                worst = (lhs, rhs, k, bits)
    if worst is None:
        return BoundReport.compare("iterated_ledoux", 0.0, 0.0, inputs=inputs,
                                   reasons=["no set qualifies at any k"])
    lhs, rhs, k, bits = worst
    return BoundReport.compare("iterated_ledoux", lhs, rhs, inputs=inputs,
                               witnesses={'k': k, 'set': f"{bits:#x}"})


def gromov_monotonicity_check(space: FiniteMetricMeasureSpace, f: LipschitzFunction,
                              epsilon: float, rho: float,
                              limit: int = DEFAULT_EXACT_LIMIT) -> BoundReport:
    """Exp_G(X; eps, rho / lip f) <= Exp_G(f(X); eps, rho)."""
    inputs = {'epsilon': epsilon, 'rho': rho, 'lip': f.lip}
    if f.lip <= 0.0:
        return BoundReport.skipped("gromov_monotonicity", "f is constant", inputs=inputs)
    image, _ = image_space(space, f)
    source = exp_gromov(space, epsilon, rho / f.lip, limit)
    target = exp_gromov(image, epsilon, rho, limit)
    return BoundReport.compare("gromov_monotonicity", source.value, target.value, inputs=inputs,
                               witnesses={'source': source.witness.hex(),
                                          'image': target.witness.hex()})


def ledoux_doubling_bound_check(space: FiniteMetricMeasureSpace, epsilon: float, rho: float,
                                limit: int = DEFAULT_EXACT_LIMIT) -> BoundReport:
    """Exp_L(eps, rho) <= C once some x has mu(B(x, 2 rho)) <= eps.

    B(x, rho) then qualifies and its rho-enlargement lies in B(x, 2 rho).
    Without such an x the check is vacuous and reported as skipped.
    """
    inputs = {'epsilon': epsilon, 'rho': rho}
    outer = ball_masses(space, np.array([2.0 * rho]))[:, 0]
    centres = np.flatnonzero(outer <= epsilon + MASS_TOL)
    if centres.size == 0:
        return BoundReport.skipped("ledoux_doubling", "vacuous: every ball B(x, 2 rho) has mass > eps",
                                   inputs=inputs)
    result = exp_ledoux(space, epsilon, rho, limit)
    constant = doubling_constant(space).constant
    return BoundReport.compare("ledoux_doubling", result.value, constant, inputs=inputs,
                               witnesses={'centre': int(centres[0])})


def gradient_surrogate(space: FiniteMetricMeasureSpace, values: np.ndarray) -> np.ndarray:
    """|grad f|(x): largest slope from x to its nearest neighbours."""
    n = space.n
    grad = np.zeros(n)
    if n < 2:
        return grad
    for x in range(n):
        d = space.dist[x].copy()
        d[x] = np.inf
        nearest = np.flatnonzero(d <= d.min() * (1.0 + 1e-12))
        grad[x] = float((np.abs(values[nearest] - values[x]) / d[nearest]).max())
    return grad


def poincare_report(space: FiniteMetricMeasureSpace, values: np.ndarray, constant: float,
                    name: str) -> BoundReport:
    mean = float(space.weight @ values)
    variance = float(space.weight @ (values - mean) ** 2)
    energy = float(space.weight @ gradient_surrogate(space, values) ** 2)
    return BoundReport.compare("poincare", variance, constant * energy, diagnostic=True,
                               inputs={'C': constant, 'function': name})


def discrete_poincare_diagnostic(space: FiniteMetricMeasureSpace, constant: float,
                                 budget: int = 10, seed: int = 0) -> List[BoundReport]:
    """Var(f) <= C * integral of |grad f|^2 over a battery of functions. Never a gate."""
    if constant <= 0.0:
        raise ValueError(f"Poincare constant must be positive, got {constant}")
    battery = [("constant", np.zeros(space.n))]
    battery += [(f"distance:{x}", space.dist[x]) for x in range(space.n)]
    rng = np.random.default_rng(seed)
    diam = diameter(space)
    for i in range(budget if diam > 0.0 else 0):
        values = rng.uniform(0.0, diam, space.n)
        values /= max(1.0, lipschitz_constant(space, values))
        battery.append((f"random:{i}", values))
    return [poincare_report(space, values, constant, name) for name, values in battery]
