"""Run every inequality check on a space and collect the reports."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import bounds
from .concentration import alpha_exact, alpha_swap_check, breakpoint_radii, check_concentration_inequality
from .enlargement import doubling_report
from .errors import DisconnectedGraph, HypothesisViolated, MMError, NotInformative
from .expansion import (
    ExpansionResult,
    discrete_poincare_diagnostic,
    exp_gromov,
    exp_ledoux,
    gromov_monotonicity_check,
    iterated_ledoux_check,
    ledoux_doubling_bound_check,
)
from .generators import SpaceGenerator
from .lipschitz import LipschitzFunction, mcshane_extend, shrink_to_lipschitz
from .observable import (
    exchange_bound_check,
    laplace_profile,
    lipschitz_domination_check,
    obsdiam_lower,
    obsdiam_upper,
    obsdiam_upper_general,
    oracle_checks,
)
from .reports import BoundReport, count_failures
from .space import METRIC_TOL, FiniteMetricMeasureSpace, diameter
from .spectral import lambda1_graph
from .subsets import DEFAULT_EXACT_LIMIT

logger = logging.getLogger(__name__)

FAULT_OFFSET = 1.0


@dataclass
class VerifyParams:
    epsilon: float = 0.5
    kappa: float = 0.1
    rho_grid: Optional[List[float]] = None
    lambda_grid: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    seed: int = 0
    budget: int = 20
    exact_limit: int = DEFAULT_EXACT_LIMIT
    oracle_step: float = 0.05
    tau: float = bounds.DEFAULT_TAU
    threads: int = 1
    graph_rule: Optional[str] = None
    function_count: int = 3
    functions: List[LipschitzFunction] = field(default_factory=list)
    fault_injection: bool = False

    @classmethod
    def from_config(cls, config) -> "VerifyParams":
        return cls(epsilon=config.epsilon, kappa=config.kappa, rho_grid=config.rho_grid,
                   lambda_grid=list(config.lambda_grid), seed=config.seed,
                   budget=config.ascent_budget, exact_limit=config.exact_limit,
                   oracle_step=config.oracle_step, tau=config.tau,
                   threads=config.workers, graph_rule=config.graph_rule,
                   fault_injection=config.fault_injection)


def default_rho_grid(space: FiniteMetricMeasureSpace) -> List[float]:
    """Distinct pairwise distances up to diam/2, or the smallest distance if none is that small."""
    d = space.distances()
    if d.size == 0:
        return []
    grid = [float(x) for x in d if x <= diameter(space) / 2.0 + METRIC_TOL]
    return grid or [float(d[0])]


def sample_functions(space: FiniteMetricMeasureSpace, count: int, seed: int) -> List[LipschitzFunction]:
    """d(0, .) followed by count random 1-Lipschitz McShane extensions."""
    functions = [LipschitzFunction.on(space, space.dist[0])]
    rng = np.random.default_rng(seed)
    for _ in range(count if space.n > 1 else 0):
        size = int(rng.integers(1, space.n + 1))
        points = rng.choice(space.n, size=size, replace=False)
        raw = LipschitzFunction.on(space, rng.uniform(0.0, diameter(space), space.n))
        values = shrink_to_lipschitz(raw).values
        anchors = {int(p): float(values[p]) for p in points}
        functions.append(mcshane_extend(space, anchors, 1.0))
    return functions


class CheckRunner:
    """Shared exact quantities for one space, and the check groups built on them."""

    def __init__(self, space: FiniteMetricMeasureSpace, params: VerifyParams):
        self.space = space
        self.params = params
        self.diam = diameter(space)
        self.rhos = list(params.rho_grid) if params.rho_grid is not None else default_rho_grid(space)
        eps = params.epsilon
        self.gromov: Dict[float, ExpansionResult] = {rho: exp_gromov(space, eps, rho, params.exact_limit)
                                                     for rho in self.rhos}
        self.ledoux: Dict[float, ExpansionResult] = {rho: exp_ledoux(space, 1.0 - eps, rho, params.exact_limit)
                                                     for rho in self.rhos}
        self.ledoux_eps: Dict[float, ExpansionResult] = {rho: exp_ledoux(space, eps, rho, params.exact_limit)
                                                         for rho in self.rhos}
        self.obsdiam = obsdiam_lower(space, params.kappa, params.budget, params.seed)

    def _alpha(self, r: float) -> float:
        value, _ = alpha_exact(self.space, self.params.epsilon, r, self.params.exact_limit)
        return value + FAULT_OFFSET if self.params.fault_injection else value

    def _inputs(self, rho: float, **extra) -> dict:
        return {'epsilon': self.params.epsilon, 'kappa': self.params.kappa, 'rho': rho, **extra}

    def _ledoux_or_skip(self, name: str, rho: float) -> Optional[BoundReport]:
        result = self.ledoux[rho]
        if result.unbounded:
            return BoundReport.skipped(name, "Exp_L(1 - eps, rho) is unbounded", inputs=self._inputs(rho))
        if not result.informative:
            return BoundReport.skipped(name, "Exp_L(1 - eps, rho) is not above 1", inputs=self._inputs(rho))
        return None

    def concentration_checks(self) -> List[BoundReport]:
        p = self.params
        radii = breakpoint_radii(self.space)
        reports = []
        for f in sample_functions(self.space, p.function_count, p.seed) + list(p.functions):
            reports += check_concentration_inequality(self.space, f, p.epsilon, radii, p.exact_limit)
        for r in radii:
            ok = alpha_swap_check(self.space, p.epsilon, r, p.exact_limit)
            reports.append(BoundReport(name="alpha_swap", passed=ok, inputs={'epsilon': p.epsilon, 'r': r}))
            # A_r contains A, so alpha^eps(r) <= 1 - eps
            reports.append(BoundReport.compare("alpha_range", self._alpha(r), 1.0 - p.epsilon,
                                               inputs={'epsilon': p.epsilon, 'r': r}))
        return reports

    def duality_checks(self) -> List[BoundReport]:
        p = self.params
        eps = min(p.epsilon, 1.0 - p.epsilon)
        inputs = {'kappa': p.kappa, 'epsilon': eps}
        witness = {'lower_witness': self.obsdiam.witness.to_dict()}
        upper = obsdiam_upper(self.space, p.kappa, eps, p.exact_limit)
        general = obsdiam_upper_general(self.space, p.kappa, p.epsilon, p.exact_limit)
        return [
            BoundReport.compare("obsdiam_duality", self.obsdiam.lower, upper, inputs=inputs, witnesses=witness),
            BoundReport.compare("obsdiam_duality_general", self.obsdiam.lower, general,
                                inputs={'kappa': p.kappa, 'epsilon': p.epsilon}),
        ]

    def exponential_concentration_checks(self) -> List[BoundReport]:
        eps = self.params.epsilon
        reports = []
        for rho in self.rhos:
            skip = self._ledoux_or_skip("concentration_ledoux", rho)
            if skip is not None:
                reports.append(skip)
                continue
            exp_l, exp_g = self.ledoux[rho].value, self.gromov[rho].value
            for k in (1, 2, 3):
                r = k * rho
                if r > self.diam + METRIC_TOL:
                    break
                alpha = self._alpha(r)
                only_ledoux = bounds.rhs_concentration_ledoux(eps, exp_l, rho, r)
                combined = bounds.rhs_concentration_gromov_ledoux(eps, exp_g, exp_l, rho, r)
                inputs = self._inputs(rho, r=r, exp_l=exp_l, exp_g=exp_g)
                reports += [
                    BoundReport.compare("concentration_ledoux", alpha, only_ledoux, inputs=inputs),
                    BoundReport.compare("concentration_gromov_ledoux", alpha, combined, inputs=inputs),
                    BoundReport.compare("ledoux_sharper", only_ledoux, combined, inputs=inputs),
                ]
        return reports

    def gromov_answer_checks(self) -> List[BoundReport]:
        p = self.params
        reports = []
        for rho in self.rhos:
            names = ("gromov_answer_lower", "gromov_upper", "obsdiam_by_answer", "obsdiam_by_ledoux")
            skip = self._ledoux_or_skip(names[0], rho)
            if skip is None and p.epsilon > 0.5:
                skip = BoundReport.skipped(names[0], "eps > 1/2", inputs=self._inputs(rho))
            if skip is not None:
                reports += [BoundReport.skipped(n, *skip.reasons, inputs=skip.inputs) for n in names]
                continue
            exp_l, exp_g = self.ledoux[rho].value, self.gromov[rho].value
            lower = self.obsdiam.lower
            inputs = self._inputs(rho, exp_l=exp_l, exp_g=exp_g, obsdiam_lower=lower)
            reports.append(BoundReport.compare(
                "gromov_answer_lower", exp_g,
                bounds.gromov_answer_lower(p.kappa, p.epsilon, rho, exp_l, lower),
                relation=">=", inputs=inputs))
            holds, reasons = bounds.gromov_upper_hypothesis(p.kappa, p.epsilon, exp_g, exp_l)
            if holds:
                reports.append(BoundReport.compare(
                    "gromov_upper", exp_g, bounds.gromov_upper(p.kappa, p.epsilon, rho, exp_l, lower),
                    inputs=inputs))
            else:
                reports.append(BoundReport.skipped("gromov_upper", *reasons, inputs=inputs))
            reports.append(BoundReport.compare(
                "obsdiam_by_answer", lower, bounds.obsdiam_upper_by_answer(p.kappa, p.epsilon, rho, exp_l),
                inputs=inputs))
            try:
                cited = bounds.obsdiam_upper_by_ledoux(p.kappa, p.epsilon, rho, exp_l)
            except NotInformative as e:
                reports.append(BoundReport.skipped("obsdiam_by_ledoux", str(e), inputs=inputs))
            else:
                reports.append(BoundReport.compare("obsdiam_by_ledoux", lower, cited, inputs=inputs,
                                                   diagnostic=True))
        return reports

    def diameter_checks(self) -> List[BoundReport]:
        p = self.params
        reports = []
        constant = doubling_report(self.space).constant if self.rhos else 1.0
        for rho in self.rhos:
            inputs = self._inputs(rho, C=constant, tau=p.tau)
            exp_l1, exp_le = self.ledoux[rho], self.ledoux_eps[rho]
            if not (exp_l1.informative and exp_le.informative):
                reports.append(BoundReport.skipped("diameter_upper", "an Exp_L is unbounded or not above 1",
                                                   inputs=inputs))
                continue
            try:
                bound = bounds.diameter_upper(constant, p.epsilon, rho, exp_le.value, exp_l1.value, p.tau)
            except HypothesisViolated as e:
                reports.append(BoundReport.skipped("diameter_upper", str(e), inputs=inputs))
                continue
            reports.append(BoundReport.compare(
                "diameter_upper", self.diam, bound.value, inputs=inputs,
                witnesses={'branch_large_ball': bound.branch_large_ball,
                           'branch_small_ball': bound.branch_small_ball},
                diagnostic=not math.isclose(p.tau, bounds.DEFAULT_TAU)))
        for estimate in laplace_profile(self.space, p.lambda_grid, p.budget, p.seed):
            reports.append(BoundReport.compare(
                "diameter_lower", bounds.diameter_lower_from_laplace(estimate.lam, estimate.lower),
                self.diam, inputs={'lambda': estimate.lam, 'laplace_lower': estimate.lower},
                witnesses={'laplace_witness': estimate.witness.to_dict()}))
            reports.append(exchange_bound_check(self.space, estimate))
        return reports

    def doubling_checks(self) -> List[BoundReport]:
        p = self.params
        doubling = doubling_report(self.space)
        reports = [BoundReport(name="doubling_characterization", passed=doubling.characterization_ok,
                               inputs={'C': doubling.constant},
                               witnesses={'worst_quadruple': list(doubling.worst_quadruple),
                                          'worst_slack': doubling.worst_slack})]
        witness = sample_functions(self.space, 1, p.seed)[-1]
        for rho in self.rhos:
            reports.append(ledoux_doubling_bound_check(self.space, p.epsilon, rho, p.exact_limit))
            reports.append(iterated_ledoux_check(self.space, p.epsilon, rho, 3, p.exact_limit))
            reports.append(gromov_monotonicity_check(self.space, witness, p.epsilon, rho, p.exact_limit))
        if self.space.n > 1:
            reports.append(lipschitz_domination_check(self.space, witness, p.kappa,
                                                      min(p.epsilon, 1.0 - p.epsilon), p.budget, p.seed,
                                                      p.exact_limit))
        return reports

    def oracle_checks(self) -> List[BoundReport]:
        p = self.params
        laplace = laplace_profile(self.space, p.lambda_grid, p.budget, p.seed)
        return oracle_checks(self.space, self.obsdiam, laplace, p.oracle_step, p.epsilon, p.exact_limit)

    def spectral_checks(self) -> List[BoundReport]:
        p = self.params
        if p.graph_rule is None:
            return []
        try:
            spectral = lambda1_graph(self.space, p.graph_rule)
        except DisconnectedGraph as e:
            return [BoundReport.skipped("spectral", str(e), inputs={'rule': p.graph_rule})]
        reports = [BoundReport.compare("eigen_residual", spectral.residual, 1e-8,
                                       inputs={'rule': p.graph_rule, 'lambda1': spectral.lambda1})]
        reports += discrete_poincare_diagnostic(self.space, 1.0 / spectral.lambda1, seed=p.seed)
        for rho in self.rhos:
            result = self.ledoux[rho]
            if result.unbounded:
                continue
            reports.append(BoundReport.compare(
                "ledoux_spectral", result.value,
                bounds.ledoux_spectral_lower(spectral.lambda1, p.epsilon, rho),
                relation=">=", diagnostic=True,
                inputs=self._inputs(rho, lambda1=spectral.lambda1)))
        return reports

    def groups(self) -> List[Callable[[], List[BoundReport]]]:
        return [self.concentration_checks, self.duality_checks, self.exponential_concentration_checks,
                self.gromov_answer_checks, self.diameter_checks, self.doubling_checks,
                self.oracle_checks, self.spectral_checks]


def verify_all(space: FiniteMetricMeasureSpace, params: Optional[VerifyParams] = None) -> List[BoundReport]:
    """Every applicable check in a fixed order; hypothesis failures come back as skipped."""
    params = params or VerifyParams()
    if space.n > params.exact_limit:
        reason = f"TooLargeForExact: {space.n} points, exact limit {params.exact_limit}"
        return [BoundReport.skipped("verify_all", reason, inputs={'n': space.n})]
    runner = CheckRunner(space, params)
    groups = runner.groups()
    if params.threads > 1:
        with ThreadPoolExecutor(max_workers=params.threads) as pool:
            results = list(pool.map(lambda group: group(), groups))
    else:
        results = [group() for group in groups]
    reports = [report for batch in results for report in batch]
    logger.debug("verify_all: %d reports, %d failures", len(reports), count_failures(reports))
    return reports


@dataclass
class SweepSummary:
    spaces: int = 0
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    failures: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {'spaces': self.spaces, 'passed': self.passed, 'failed': self.failed,
                'skipped': self.skipped, 'failures': list(self.failures)}


def sweep(count: int, params: Optional[VerifyParams] = None, sizes: Sequence[int] = (4, 10),
          seed: int = 0) -> SweepSummary:
    """verify_all over count seeded random spaces with n drawn from sizes (inclusive)."""
    params = params or VerifyParams()
    rng = np.random.default_rng(seed)
    generator = SpaceGenerator()
    summary = SweepSummary()
    for i in range(count):
        n = int(rng.integers(sizes[0], sizes[1] + 1))
        space_seed = seed + i
        space = generator.random_metric(n, seed=space_seed, uniform=bool(i % 2))
        try:
            reports = verify_all(space, params)
        except MMError as e:
            summary.failures.append({'seed': space_seed, 'n': n, 'error': e.to_dict()})
            summary.failed += 1
            continue
        summary.spaces += 1
        for report in reports:
            if report.diagnostic:
                continue
            if report.passed is None:
                summary.skipped += 1
            elif report.passed:
                summary.passed += 1
            else:
                summary.failed += 1
                summary.failures.append({'seed': space_seed, 'n': n, **report.to_dict()})
    return summary
