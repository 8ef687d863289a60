"""Isoperimetric enlargements, metric balls and the doubling constant."""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .errors import EmptySet
from .space import MASS_TOL, METRIC_TOL, FiniteMetricMeasureSpace
from .subsets import SubsetMask

logger = logging.getLogger(__name__)


@dataclass
class DoublingReport:
    """Doubling constant C with the (point, radius) attaining it."""
    constant: float
    witness: Tuple[int, float]
    characterization_ok: Optional[bool] = None
    worst_quadruple: Optional[Tuple[int, int, float, float]] = None
    worst_slack: Optional[float] = None

    def to_dict(self) -> dict:
        result = {
            'constant': self.constant,
            'witness': {'point': self.witness[0], 'radius': self.witness[1]},
        }
        if self.characterization_ok is not None:
            result['characterization_ok'] = self.characterization_ok
            x, y, r1, r2 = self.worst_quadruple
            result['worst_quadruple'] = {'x': x, 'y': y, 'r1': r1, 'r2': r2}
            result['worst_slack'] = self.worst_slack
        return result


def enlarge(space: FiniteMetricMeasureSpace, subset: SubsetMask, r: float) -> SubsetMask:
    """A_r = {x : min_{a in A} d(x, a) <= r}."""
    if subset.bits == 0:
        raise EmptySet("cannot enlarge the empty set")
    if r < 0.0:
        raise ValueError(f"enlargement radius must be nonnegative, got {r}")
    reach = space.dist[subset.members()].min(axis=0)
    return SubsetMask.of(np.flatnonzero(reach <= r + METRIC_TOL), space.n)


def ball(space: FiniteMetricMeasureSpace, x: int, r: float) -> SubsetMask:
    """Closed ball B(x, r)."""
    return enlarge(space, SubsetMask.of([x], space.n), r)


def measure(space: FiniteMetricMeasureSpace, subset: SubsetMask) -> float:
    return float(space.weight[subset.members()].sum())


def breakpoints(space: FiniteMetricMeasureSpace) -> np.ndarray:
    """D union D/2 where D is the set of positive pairwise distances."""
    d = space.distances()
    return np.unique(np.concatenate([d, d / 2.0]))


def ball_masses(space: FiniteMetricMeasureSpace, radii: np.ndarray) -> np.ndarray:
    """masses[x, k] = mu(B(x, radii[k]))."""
    order = np.argsort(space.dist, axis=1, kind='stable')
    sorted_d = np.take_along_axis(space.dist, order, axis=1)
    cum = np.cumsum(space.weight[order], axis=1)
    out = np.empty((space.n, len(radii)))
    for x in range(space.n):
        count = np.searchsorted(sorted_d[x], np.asarray(radii) + METRIC_TOL, side='right')
        out[x] = cum[x][count - 1]
    return out


def doubling_constant(space: FiniteMetricMeasureSpace) -> DoublingReport:
    """C = sup over x and r > 0 of mu(B(x, 2r)) / mu(B(x, r)).

    Both ball masses are step functions of r that only change on D union D/2,
    so scanning those radii is exact.
    """
    radii = breakpoints(space)
    if radii.size == 0:
        return DoublingReport(constant=1.0, witness=(0, 0.0))
    inner = ball_masses(space, radii)
    outer = ball_masses(space, 2.0 * radii)
    ratio = outer / inner
    flat = int(np.argmax(ratio))
    x, k = np.unravel_index(flat, ratio.shape)
    constant = max(1.0, float(ratio[x, k]))
    logger.debug("doubling constant %r at x=%d r=%r", constant, x, radii[k])
    return DoublingReport(constant=constant, witness=(int(x), float(radii[k])))


class CharacterizationResult(NamedTuple):
    ok: bool
    worst_quadruple: Tuple[int, int, float, float]
    worst_slack: float


def check_doubling_characterization(space: FiniteMetricMeasureSpace,
                                    constant: float) -> CharacterizationResult:
    """Check mu(B(y,r2)) / mu(B(x,r1)) <= C^2 (r2/r1)^(ln C / ln 2).

    Runs over breakpoint radii 0 < r1 <= r2 and every x in B(y, r2). The
    result carries the quadruple (x, y, r1, r2) of least slack.
    """
    if constant < 1.0:
        raise ValueError(f"doubling constant must be at least 1, got {constant}")
    radii = breakpoints(space)
    if radii.size == 0:
        return CharacterizationResult(True, (0, 0, 0.0, 0.0), math.inf)

    exponent = math.log(constant) / math.log(2.0)
    masses = ball_masses(space, radii)
    worst = math.inf
    quadruple = (0, 0, float(radii[0]), float(radii[0]))
    for j, r2 in enumerate(radii):
        r1 = radii[:j + 1]
        rhs = constant ** 2 * (r2 / r1) ** exponent
        for y in range(space.n):
            inside = np.flatnonzero(space.dist[y] <= r2 + METRIC_TOL)
            lhs = masses[y, j] / masses[inside][:, :j + 1]
            slack = rhs[None, :] - lhs
            flat = int(np.argmin(slack))
            if slack.flat[flat] < worst:
                xi, k = np.unravel_index(flat, slack.shape)
                worst = float(slack.flat[flat])
                quadruple = (int(inside[xi]), y, float(r1[k]), float(r2))

    ok = worst >= -MASS_TOL * constant ** 2
    if not ok:
        logger.debug("doubling characterization fails at %r (slack %r)", quadruple, worst)
    return CharacterizationResult(ok, quadruple, worst)


def doubling_report(space: FiniteMetricMeasureSpace) -> DoublingReport:
    """Doubling constant together with the characterization check at that constant."""
    report = doubling_constant(space)
    check = check_doubling_characterization(space, report.constant)
    report.characterization_ok = check.ok
    report.worst_quadruple = check.worst_quadruple
    report.worst_slack = check.worst_slack
    return report
