"""Observable diameter and Laplace functional: estimators, duality bounds and lattice oracles."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, List, Sequence, Tuple

import numpy as np

from .concentration import alpha_exact
from .errors import TooLargeForOracle
from .lipschitz import (
    LipschitzFunction,
    image_space,
    lipschitz_constant,
    shrink_to_lipschitz,
    window_width,
)
from .reports import BoundReport
from .space import MASS_TOL, FiniteMetricMeasureSpace, diameter
from .subsets import DEFAULT_EXACT_LIMIT

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 20
DEFAULT_KAPPA = 0.1
ORACLE_LIMIT = 5
ORACLE_CHUNK = 1 << 15
ORACLE_MAX_LATTICE = 2_000_000
PAIR_CANDIDATE_LIMIT = 200

ASCENT_START_STEP = 0.25
ASCENT_MIN_STEP = 1e-3
ASCENT_MAX_ROUNDS = 200
ASCENT_SAMPLE = 32
ASCENT_TOL = 1e-13

Objective = Callable[[np.ndarray], float]


@dataclass
class ObsDiamEstimate:
    """ObsDiam(X; -kappa) bracketed by a witness value and an upper bound."""
    kappa: float
    lower: float
    upper: float
    witness: LipschitzFunction
    method: str

    def to_dict(self) -> dict:
        return {'kappa': self.kappa, 'lower': self.lower, 'upper': self.upper,
                'method': self.method, 'witness': self.witness.to_dict()}


@dataclass
class LaplaceEstimate:
    """Lower bound on Lap(lambda) attained by a mean-zero 1-Lipschitz witness."""
    lam: float
    lower: float
    witness: LipschitzFunction
    method: str = "ascent"

    def to_dict(self) -> dict:
        return {'lambda': self.lam, 'lower': self.lower, 'method': self.method,
                'witness': self.witness.to_dict()}


def _check_kappa(kappa: float) -> None:
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")


def _row_ratio(space: FiniteMetricMeasureSpace, values: np.ndarray, i: int) -> float:
    d = space.dist[i]
    mask = d > 0.0
    if not mask.any():
        return 0.0
    return float((np.abs(values[mask] - values[i]) / d[mask]).max())


def _ascend(space: FiniteMetricMeasureSpace, values: np.ndarray, objective: Objective,
            center: bool, rng: np.random.Generator) -> Tuple[np.ndarray, float]:
    """Coordinate ascent over 1-Lipschitz functions.

    A move shifts one value by +-step*diam. When that breaks the Lipschitz
    bound the whole vector is scaled back (only pairs through the moved point
    can exceed 1), then re-centered if required. The step halves on a round
    without improvement.
    """
    diam = diameter(space)
    best = objective(values)
    step = ASCENT_START_STEP
    for _ in range(ASCENT_MAX_ROUNDS):
        if step < ASCENT_MIN_STEP:
            break
        improved = False
        for i in rng.permutation(space.n)[:ASCENT_SAMPLE]:
            for sign in (1.0, -1.0):
                trial = values.copy()
                trial[i] += sign * step * diam
                ratio = _row_ratio(space, trial, int(i))
                if ratio > 1.0:
                    trial /= ratio
                if center:
                    trial -= space.weight @ trial
                score = objective(trial)
                if score > best + ASCENT_TOL:
                    values, best, improved = trial, score, True
                    break
        if not improved:
            step /= 2.0
    return values, best


def _random_start(space: FiniteMetricMeasureSpace, rng: np.random.Generator,
                  center: bool) -> np.ndarray:
    values = rng.uniform(0.0, diameter(space), space.n)
    lip = lipschitz_constant(space, values)
    if lip > 1.0:
        values /= lip
    if center:
        values -= space.weight @ values
    return values


def _restarts(space: FiniteMetricMeasureSpace, objective: Objective, center: bool,
              budget: int, seed: int, threads: int,
              best_start: np.ndarray) -> List[Tuple[np.ndarray, float]]:
    """budget random restarts plus one refinement of best_start, in a fixed order."""
    if diameter(space) == 0.0:
        return []
    streams = np.random.SeedSequence(seed).spawn(budget + 1)

    def run(index: int) -> Tuple[np.ndarray, float]:
        rng = np.random.default_rng(streams[index])
        start = best_start.copy() if index == budget else _random_start(space, rng, center)
        return _ascend(space, start, objective, center, rng)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, range(budget + 1)))
    return [run(i) for i in range(budget + 1)]


def _best(candidates: Iterator[Tuple[np.ndarray, float]],
          fallback: np.ndarray, floor: float) -> Tuple[np.ndarray, float]:
    values, best = fallback, floor
    for candidate, score in candidates:
        if score > best + ASCENT_TOL:
            values, best = candidate, score
    return values, best


def distance_candidates(space: FiniteMetricMeasureSpace) -> Iterator[np.ndarray]:
    """d(x, .) for every point, then d(A, .) for every pair A when n is moderate."""
    for x in range(space.n):
        yield space.dist[x]
    if space.n <= PAIR_CANDIDATE_LIMIT:
        for a in range(space.n):
            for b in range(a + 1, space.n):
                yield np.minimum(space.dist[a], space.dist[b])


def obsdiam_lower(space: FiniteMetricMeasureSpace, kappa: float = DEFAULT_KAPPA,
                  budget: int = DEFAULT_BUDGET, seed: int = 0,
                  threads: int = 1) -> ObsDiamEstimate:
    """Largest partial diameter of f_* mu found over 1-Lipschitz candidates.

    The upper field is the trivial bound diam(X).
    """
    _check_kappa(kappa)

    def objective(values: np.ndarray) -> float:
        return window_width(values, space.weight, kappa)

    values, best = _best(((v, objective(v)) for v in distance_candidates(space)),
                         np.zeros(space.n), 0.0)
    values, best = _best(iter(_restarts(space, objective, False, budget, seed, threads, values)),
                         values, best)
    witness = LipschitzFunction.on(space, values)
    logger.debug("obsdiam lower %r for kappa=%r (n=%d)", best, kappa, space.n)
    return ObsDiamEstimate(kappa=kappa, lower=best, upper=diameter(space),
                           witness=witness, method="ascent")


def obsdiam_upper(space: FiniteMetricMeasureSpace, kappa: float, epsilon: float = 0.5,
                  limit: int = DEFAULT_EXACT_LIMIT) -> float:
    """2 min { r : alpha^eps(r) <= kappa / 2 } over r in {0} union the pairwise distances."""
    _check_kappa(kappa)
    if epsilon > 0.5:
        raise ValueError(f"duality bound needs epsilon <= 1/2, got {epsilon}")
    for r in [0.0] + [float(d) for d in space.distances()]:
        value, _ = alpha_exact(space, epsilon, r, limit)
        if value <= kappa / 2.0 + MASS_TOL:
            return 2.0 * r
    return 2.0 * diameter(space)


def obsdiam_upper_general(space: FiniteMetricMeasureSpace, kappa: float, epsilon: float,
                          limit: int = DEFAULT_EXACT_LIMIT) -> float:
    """2 min { r : alpha^eps(r) + alpha^(1-eps)(r) <= kappa }, valid for every eps."""
    _check_kappa(kappa)
    for r in [0.0] + [float(d) for d in space.distances()]:
        a, _ = alpha_exact(space, epsilon, r, limit)
        b, _ = alpha_exact(space, 1.0 - epsilon, r, limit)
        if a + b <= kappa + MASS_TOL:
            return 2.0 * r
    return 2.0 * diameter(space)


def obsdiam_sandwich(space: FiniteMetricMeasureSpace, kappa: float = DEFAULT_KAPPA,
                     epsilon: float = 0.5, budget: int = DEFAULT_BUDGET, seed: int = 0,
                     threads: int = 1, limit: int = DEFAULT_EXACT_LIMIT) -> ObsDiamEstimate:
    """Witness lower bound with the duality upper bound when the space is small enough."""
    estimate = obsdiam_lower(space, kappa, budget, seed, threads)
    if space.n <= limit:
        estimate.upper = min(estimate.upper, obsdiam_upper(space, kappa, epsilon, limit))
        estimate.method = "duality"
    return estimate


def _lattice_chunks(space: FiniteMetricMeasureSpace, h: float,
                    nonnegative_second: bool) -> Iterator[np.ndarray]:
    """Functions with f(0) = 0 and f(x) in hZ with |f(x)| <= d(0, x) rounded up to the lattice.

    Every 1-Lipschitz f with f(0) = 0 has a lattice point within h/2 of it.
    """
    n = space.n
    axes = []
    for x in range(1, n):
        m = int(math.ceil(space.dist[0, x] / h - 1e-9))
        low = 0 if (nonnegative_second and x == 1) else -m
        axes.append(np.arange(low, m + 1, dtype=float) * h)
    if not axes:
        yield np.zeros((1, 1))
        return
    head, tail = axes[0], axes[1:]
    grid = np.stack(np.meshgrid(*tail, indexing='ij'), axis=-1).reshape(-1, n - 2) \
        if tail else np.zeros((1, 0))
    per_chunk = max(1, ORACLE_CHUNK // max(1, grid.shape[0]))
    for start in range(0, head.size, per_chunk):
        firsts = head[start:start + per_chunk]
        block = np.empty((firsts.size * grid.shape[0], n))
        block[:, 0] = 0.0
        block[:, 1] = np.repeat(firsts, grid.shape[0])
        block[:, 2:] = np.tile(grid, (firsts.size, 1))
        yield block


def _envelope_rows(space: FiniteMetricMeasureSpace, block: np.ndarray) -> np.ndarray:
    """Largest 1-Lipschitz function below each row: min_y g(y) + d(y, x)."""
    return (block[:, :, None] + space.dist[None, :, :]).min(axis=1)


def _window_rows(space: FiniteMetricMeasureSpace, block: np.ndarray, kappa: float) -> np.ndarray:
    order = np.argsort(block, axis=1, kind='stable')
    pos = np.take_along_axis(block, order, axis=1)
    cum = np.concatenate([np.zeros((block.shape[0], 1)),
                          np.cumsum(space.weight[order], axis=1)], axis=1)
    need = 1.0 - kappa - MASS_TOL
    best = np.full(block.shape[0], np.inf)
    for a in range(space.n):
        for b in range(a, space.n):
            ok = cum[:, b + 1] - cum[:, a] >= need
            best = np.where(ok, np.minimum(best, pos[:, b] - pos[:, a]), best)
    return best


def lattice_size(space: FiniteMetricMeasureSpace, h: float) -> int:
    """Number of lattice functions the oracles evaluate at step h."""
    size = 1
    for x in range(1, space.n):
        size *= 2 * int(math.ceil(space.dist[0, x] / h - 1e-9)) + 1
    return size


def _check_oracle(space: FiniteMetricMeasureSpace, h: float) -> None:
    if space.n > ORACLE_LIMIT:
        raise TooLargeForOracle(f"lattice oracle handles at most {ORACLE_LIMIT} points, got {space.n}",
                                {"n": space.n, "oracle_limit": ORACLE_LIMIT})
    if h <= 0.0:
        raise ValueError(f"lattice step must be positive, got {h}")


def obsdiam_oracle(space: FiniteMetricMeasureSpace, kappa: float, h: float) -> float:
    """Exhaustive lattice search for ObsDiam on at most five points.

    Each lattice function is replaced by the largest 1-Lipschitz function
    below it, so the result never exceeds the true observable diameter and
    is at least the partial diameter of any 1-Lipschitz witness minus h.
    f and -f have the same partial diameter, so f(1) >= 0 is assumed.
    """
    _check_kappa(kappa)
    _check_oracle(space, h)
    if space.n == 1:
        return 0.0
    best = 0.0
    for block in _lattice_chunks(space, h, nonnegative_second=True):
        best = max(best, float(_window_rows(space, _envelope_rows(space, block), kappa).max()))
    return best


def _laplace_objective(space: FiniteMetricMeasureSpace, lam: float) -> Objective:
    def objective(values: np.ndarray) -> float:
        return float(space.weight @ np.exp(lam * values))
    return objective


def laplace_lower(space: FiniteMetricMeasureSpace, lam: float, budget: int = DEFAULT_BUDGET,
                  seed: int = 0, threads: int = 1) -> LaplaceEstimate:
    """Lower bound on sup of the integral of exp(lam f) over mean-zero 1-Lipschitz f."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    objective = _laplace_objective(space, lam)

    def candidates() -> Iterator[Tuple[np.ndarray, float]]:
        for x in range(space.n):
            centered = space.dist[x] - space.weight @ space.dist[x]
            for v in (centered, -centered):
                yield v, objective(v)

    values, best = _best(candidates(), np.zeros(space.n), 1.0)
    values, best = _best(iter(_restarts(space, objective, True, budget, seed, threads, values)),
                         values, best)
    witness = LipschitzFunction.on(space, values)
    return LaplaceEstimate(lam=lam, lower=max(1.0, objective(witness.values)), witness=witness)


def laplace_profile(space: FiniteMetricMeasureSpace, lambdas: Sequence[float],
                    budget: int = DEFAULT_BUDGET, seed: int = 0,
                    threads: int = 1) -> List[LaplaceEstimate]:
    """laplace_lower on a grid, each value maximized over every witness found on the grid.

    For mean-zero f the integral of exp(lam f) is nondecreasing in lam > 0,
    so the returned lower bounds are nondecreasing along the sorted grid.
    """
    grid = sorted(float(lam) for lam in lambdas)
    estimates = [laplace_lower(space, lam, budget, seed, threads) for lam in grid]
    witnesses = [e.witness for e in estimates]
    out = []
    for lam in grid:
        objective = _laplace_objective(space, lam)
        scores = [objective(w.values) for w in witnesses]
        k = int(np.argmax(scores))
        out.append(LaplaceEstimate(lam=lam, lower=max(1.0, scores[k]), witness=witnesses[k]))
    return out


def laplace_oracle(space: FiniteMetricMeasureSpace, lam: float, h: float) -> float:
    """Lattice search for Lap(lam) on at most five points.

    Functions are lowered to their 1-Lipschitz envelope, then centered; the
    result is at least exp(-lam h) times the value of any admissible witness.
    """
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    _check_oracle(space, h)
    if space.n == 1:
        return 1.0
    best = 1.0
    for block in _lattice_chunks(space, h, nonnegative_second=False):
        lowered = _envelope_rows(space, block)
        lowered -= (lowered @ space.weight)[:, None]
        best = max(best, float((np.exp(lam * lowered) @ space.weight).max()))
    return best


def exchange_bound_check(space: FiniteMetricMeasureSpace, estimate: LaplaceEstimate) -> BoundReport:
    """The witness integral never exceeds exp((lam diam)^2 / 2)."""
    diam = diameter(space)
    return BoundReport.compare("exchange_bound", estimate.lower,
                               math.exp((estimate.lam * diam) ** 2 / 2.0),
                               inputs={'lambda': estimate.lam, 'diameter': diam})


def lipschitz_domination_check(space: FiniteMetricMeasureSpace, f: LipschitzFunction,
                               kappa: float, epsilon: float = 0.5, budget: int = DEFAULT_BUDGET,
                               seed: int = 0, limit: int = DEFAULT_EXACT_LIMIT) -> BoundReport:
    """ObsDiam lower bound of the image f(X) against the duality upper bound of X.

    f is shrunk to be 1-Lipschitz first, so X dominates its image.
    """
    image, _ = image_space(space, shrink_to_lipschitz(f))
    lower = obsdiam_lower(image, kappa, budget, seed).lower
    upper = obsdiam_upper(space, kappa, epsilon, limit)
    return BoundReport.compare("lipschitz_domination", lower, upper,
                               inputs={'kappa': kappa, 'epsilon': epsilon, 'image_points': image.n})


def oracle_checks(space: FiniteMetricMeasureSpace, estimate: ObsDiamEstimate,
                  laplace: Sequence[LaplaceEstimate], h: float, epsilon: float = 0.5,
                  limit: int = DEFAULT_EXACT_LIMIT) -> List[BoundReport]:
    """Place the lattice oracles between the ascent estimates and the duality bound.

    The ObsDiam oracle lies in [lower - h, upper]; the Laplace oracle is at
    least exp(-lam h) times the ascent value.
    """
    inputs = {'n': space.n, 'h': h}
    if space.n > ORACLE_LIMIT:
        return [BoundReport.skipped("obsdiam_oracle", f"TooLargeForOracle: {space.n} > {ORACLE_LIMIT}",
                                    inputs=inputs)]
    size = lattice_size(space, h)
    if size > ORACLE_MAX_LATTICE:
        return [BoundReport.skipped("obsdiam_oracle", f"lattice of {size} functions at step {h}",
                                    inputs=inputs)]
    kappa = estimate.kappa
    oracle = obsdiam_oracle(space, kappa, h)
    upper = obsdiam_upper(space, kappa, min(epsilon, 1.0 - epsilon), limit)
    reports = [
        BoundReport.compare("obsdiam_oracle_upper", oracle, upper, inputs={**inputs, 'kappa': kappa}),
        BoundReport.compare("obsdiam_oracle_lower", oracle, estimate.lower - h, relation=">=",
                            inputs={**inputs, 'kappa': kappa, 'ascent_lower': estimate.lower}),
    ]
    for item in laplace:
        value = laplace_oracle(space, item.lam, h)
        reports.append(BoundReport.compare(
            "laplace_oracle", value, item.lower * math.exp(-item.lam * h), relation=">=",
            inputs={**inputs, 'lambda': item.lam, 'ascent_lower': item.lower}))
    return reports
