"""Concentration functions, envelope fits, quantiles and concentration inequalities."""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DegenerateProfile, SpaceFileError
from .lipschitz import LipschitzFunction
from .reports import BoundReport
from .space import MASS_TOL, METRIC_TOL, FiniteMetricMeasureSpace, diameter
from .subsets import DEFAULT_EXACT_LIMIT, SubsetMask, exact_solver

logger = logging.getLogger(__name__)

FIT_KINDS = ("exponential", "gaussian")


@dataclass
class ConcentrationProfile:
    """alpha^epsilon evaluated on a sorted grid of radii."""
    epsilon: float
    radii: List[float]
    values: List[float]
    witnesses: List[SubsetMask]
    method: str = "exact"

    def to_rows(self) -> List[Tuple[float, float, str]]:
        return [(r, a, w.hex()) for r, a, w in zip(self.radii, self.values, self.witnesses)]

    def to_dict(self) -> dict:
        return {
            'epsilon': self.epsilon,
            'method': self.method,
            'radii': list(self.radii),
            'values': list(self.values),
            'witnesses': [w.hex() for w in self.witnesses],
        }

    def save_csv(self, path: Path) -> None:
        """Write (r, alpha, witness_mask_hex) rows for external plotting."""
        try:
            with open(path, 'w', newline='', encoding='utf-8') as handle:
                writer = csv.writer(handle)
                writer.writerow(['r', 'alpha', 'witness_mask_hex'])
                for r, a, w in self.to_rows():
                    writer.writerow([repr(r), repr(a), w])
        except OSError as e:
            raise SpaceFileError(f"Failed to write profile file '{path}': {e}")


@dataclass
class ProfileFit:
    """Envelope C1 exp(-C2 r) or C1 exp(-C2 r^2) dominating a profile."""
    kind: str
    C1: float
    C2: float
    residual: float
    certified: bool = True
    fallback_rate: bool = False

    def envelope(self, r: float) -> float:
        x = r if self.kind == "exponential" else r * r
        return self.C1 * math.exp(-self.C2 * x)

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'C1': self.C1, 'C2': self.C2, 'residual': self.residual,
                'certified': self.certified, 'fallback_rate': self.fallback_rate}


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")


def alpha_exact(space: FiniteMetricMeasureSpace, epsilon: float, r: float,
                limit: int = DEFAULT_EXACT_LIMIT) -> Tuple[float, SubsetMask]:
    """alpha^eps(r) = max over mu(A) >= eps of 1 - mu(A_r), with the maximizing A.

    Only inclusion-minimal A need to be searched: enlarging A can only grow A_r.
    """
    _check_epsilon(epsilon)
    if r < 0.0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    solver = exact_solver(space, limit)
    best, witness = 0.0, solver.full
    for bits in solver.heavy_sets(epsilon):
        missing = 1.0 - solver.mass(solver.enlarge(bits, r))
        if missing > best + MASS_TOL:
            best, witness = missing, bits
    return max(0.0, best), SubsetMask(witness, space.n)


def alpha_profile(space: FiniteMetricMeasureSpace, epsilon: float, radii: Sequence[float],
                  limit: int = DEFAULT_EXACT_LIMIT) -> ConcentrationProfile:
    grid = sorted(float(r) for r in radii)
    values, witnesses = [], []
    for r in grid:
        value, witness = alpha_exact(space, epsilon, r, limit)
        values.append(value)
        witnesses.append(witness)
    for a, b in zip(values, values[1:]):
        if b > a + MASS_TOL:
            raise RuntimeError(f"concentration profile is not nonincreasing: {values}")
    return ConcentrationProfile(epsilon, grid, values, witnesses)


def alpha_swap_check(space: FiniteMetricMeasureSpace, epsilon: float, r: float,
                     limit: int = DEFAULT_EXACT_LIMIT) -> bool:
    """alpha^eps(r) <= alpha^(1-eps)(r) when eps >= 1/2, mirrored when eps <= 1/2."""
    a_eps, _ = alpha_exact(space, epsilon, r, limit)
    a_swap, _ = alpha_exact(space, 1.0 - epsilon, r, limit)
    if epsilon >= 0.5:
        return a_eps <= a_swap + MASS_TOL
    return a_swap <= a_eps + MASS_TOL


def alpha_ball_profile(space: FiniteMetricMeasureSpace, epsilon: float,
                       radii: Sequence[float]) -> ConcentrationProfile:
    """Lower estimate of alpha^eps over the family of closed balls.

    For A = B(x, s) with s the least radius reaching mass eps, A_r lies inside
    B(x, s + r), so 1 - mu(B(x, s + r)) <= 1 - mu(A_r) <= alpha^eps(r).
    """
    _check_epsilon(epsilon)
    grid = sorted(float(r) for r in radii)
    order = np.argsort(space.dist, axis=1, kind='stable')
    sorted_d = np.take_along_axis(space.dist, order, axis=1)
    cum = np.cumsum(space.weight[order], axis=1)
    first = np.argmax(cum >= epsilon - MASS_TOL, axis=1)
    s = sorted_d[np.arange(space.n), first]

    values, witnesses = [], []
    for r in grid:
        best, centre = -1.0, 0
        for x in range(space.n):
            count = np.searchsorted(sorted_d[x], s[x] + r + METRIC_TOL, side='right')
            missing = 1.0 - cum[x, count - 1]
            if missing > best + MASS_TOL:
                best, centre = missing, x
        values.append(max(0.0, float(best)))
        witnesses.append(SubsetMask.of(order[centre, :first[centre] + 1], space.n))
    return ConcentrationProfile(epsilon, grid, values, witnesses, method="ball_estimate")


def alpha_ball_estimate(space: FiniteMetricMeasureSpace, epsilon: float,
                        r: float) -> Tuple[float, SubsetMask]:
    profile = alpha_ball_profile(space, epsilon, [r])
    return profile.values[0], profile.witnesses[0]


def fit_profile(profile: ConcentrationProfile, kind: str) -> ProfileFit:
    """Least-squares fit of ln alpha against r or r^2, inflated to dominate the profile.

    Zero entries are ignored. When the fitted rate is not positive the rate
    falls back to 1 / max(x) and only C1 is fitted.
    """
    if kind not in FIT_KINDS:
        raise ValueError(f"Unknown fit kind '{kind}', expected one of {', '.join(FIT_KINDS)}")
    r = np.asarray(profile.radii, dtype=float)
    a = np.asarray(profile.values, dtype=float)
    positive = a > 0.0
    if positive.sum() < 2:
        raise DegenerateProfile(f"need at least two positive profile values, got {int(positive.sum())}")
    x = r[positive] if kind == "exponential" else r[positive] ** 2
    y = np.log(a[positive])

    fallback = False
    if np.ptp(x) > 0.0:
        slope, intercept = np.polyfit(x, y, 1)
        rate = -float(slope)
    else:
        rate, intercept = 0.0, float(y.mean())
    if rate <= 0.0:
        fallback = True
        rate = 1.0 / x.max() if x.max() > 0.0 else 1.0
        intercept = float(y.max())

    excess = float((y - (intercept - rate * x)).max())
    if excess > 0.0:
        intercept += excess
    residual = float(np.abs(y - (intercept - rate * x)).max())
    return ProfileFit(kind=kind, C1=math.exp(intercept), C2=rate, residual=residual,
                      certified=True, fallback_rate=fallback)


def gaussian_to_exponential(fit: ProfileFit) -> ProfileFit:
    """Gaussian envelope implies exponential: C2 r^2 >= C2 r - C2/4, so C1' = C1 e^(C2/4)."""
    if fit.kind != "gaussian":
        raise ValueError("expected a gaussian fit")
    return ProfileFit(kind="exponential", C1=fit.C1 * math.exp(fit.C2 / 4.0), C2=fit.C2,
                      residual=fit.residual, certified=fit.certified,
                      fallback_rate=fit.fallback_rate)


def quantile(space: FiniteMetricMeasureSpace, f: LipschitzFunction, epsilon: float) -> float:
    """Smallest attained m with mu(f <= m) >= eps and mu(f >= m) >= 1 - eps."""
    _check_epsilon(epsilon)
    values, inverse = np.unique(f.values, return_inverse=True)
    masses = np.bincount(inverse.reshape(-1), weights=space.weight, minlength=len(values))
    below = np.cumsum(masses)
    above = np.concatenate([[0.0], below[:-1]])
    for m, le, lt in zip(values, below, above):
        if le >= epsilon - MASS_TOL and 1.0 - lt >= 1.0 - epsilon - MASS_TOL:
            return float(m)
    return float(values[-1])


def check_concentration_inequality(space: FiniteMetricMeasureSpace, f: LipschitzFunction,
                                   epsilon: float, radii: Sequence[float],
                                   limit: int = DEFAULT_EXACT_LIMIT) -> List[BoundReport]:
    """mu(|f - m_f| > r) <= alpha^eps(r/L) + alpha^(1-eps)(r/L), L = lip(f).

    Also checks the deviation half mu(f > m_f + r) <= alpha^eps(r/L), and the
    sharper 2 alpha^(1-eps)(r/L) form when eps >= 1/2.
    """
    _check_epsilon(epsilon)
    m = quantile(space, f, epsilon)
    deviation = f.values - m
    reports = []
    for r in radii:
        r = float(r)
        inputs = {'epsilon': epsilon, 'r': r, 'lip': f.lip, 'median': m}
        if f.lip <= 0.0:
            lhs = 0.0 if r > 0.0 else float(space.weight[np.abs(deviation) > 0.0].sum())
            reports.append(BoundReport.compare("concentration_inequality", lhs, 0.0,
                                               inputs=inputs, reasons=["constant function"]))
            continue
        scaled = r / f.lip
        a_eps, w_eps = alpha_exact(space, epsilon, scaled, limit)
        a_swap, w_swap = alpha_exact(space, 1.0 - epsilon, scaled, limit)
        cut = r + METRIC_TOL * (1.0 + f.lip)
        two_sided = float(space.weight[np.abs(deviation) > cut].sum())
        upper = float(space.weight[deviation > cut].sum())
        witnesses = {'alpha_eps': w_eps.hex(), 'alpha_swap': w_swap.hex()}
        reports.append(BoundReport.compare("concentration_inequality", two_sided, a_eps + a_swap,
                                           inputs=inputs, witnesses=witnesses))
        reports.append(BoundReport.compare("deviation_inequality", upper, a_eps,
                                           inputs=inputs, witnesses=witnesses))
        if epsilon >= 0.5:
            reports.append(BoundReport.compare("concentration_inequality_sharp", two_sided,
                                               2.0 * a_swap, inputs=inputs, witnesses=witnesses))
    return reports


def breakpoint_radii(space: FiniteMetricMeasureSpace) -> List[float]:
    """0 together with every distinct pairwise distance: alpha only changes there."""
    return [0.0] + [float(d) for d in space.distances()]


def default_radii(space: FiniteMetricMeasureSpace, count: int = 10) -> List[float]:
    diam = diameter(space)
    if diam == 0.0:
        return [0.0]
    return [float(x) for x in np.linspace(0.0, diam, count)]
