"""Lipschitz functions, pushforward measures on the line and partial diameters."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from .errors import AnchorsNotLipschitz, SpaceFileError
from .space import MASS_TOL, METRIC_TOL, FiniteMetricMeasureSpace, validate_space
from .subsets import DEFAULT_EXACT_LIMIT, exact_solver, members

logger = logging.getLogger(__name__)


def lipschitz_constant(space: FiniteMetricMeasureSpace, values: np.ndarray) -> float:
    """max over i != j of |f(i) - f(j)| / d(i, j)."""
    if space.n < 2:
        return 0.0
    gaps = np.abs(values[:, None] - values[None, :])
    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = np.where(space.dist > 0.0, gaps / space.dist, 0.0)
    return float(ratios.max())


@dataclass(frozen=True, eq=False)
class LipschitzFunction:
    """A real value per point with its Lipschitz constant."""
    values: np.ndarray
    lip: float

    @classmethod
    def on(cls, space: FiniteMetricMeasureSpace, values) -> "LipschitzFunction":
        v = np.array(values, dtype=float, copy=True).reshape(-1)
        if v.shape[0] != space.n:
            raise ValueError(f"expected {space.n} values, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise ValueError("function values must be finite")
        v.setflags(write=False)
        return cls(values=v, lip=lipschitz_constant(space, v))

    def scaled(self, factor: float) -> "LipschitzFunction":
        v = self.values * factor
        v.setflags(write=False)
        return LipschitzFunction(values=v, lip=self.lip * abs(factor))

    def shifted(self, offset: float) -> "LipschitzFunction":
        v = self.values + offset
        v.setflags(write=False)
        return LipschitzFunction(values=v, lip=self.lip)

    def mean(self, space: FiniteMetricMeasureSpace) -> float:
        return float(space.weight @ self.values)

    def centered(self, space: FiniteMetricMeasureSpace) -> "LipschitzFunction":
        return self.shifted(-self.mean(space))

    def to_dict(self) -> dict:
        return {'f': self.values.tolist(), 'lip': self.lip}

    def save(self, path: Path) -> None:
        """Write the witness companion document {"f": [...], "lip": ...}."""
        try:
            Path(path).write_text(json.dumps(self.to_dict()), encoding='utf-8')
        except OSError as e:
            raise SpaceFileError(f"Failed to write function file '{path}': {e}")

    @classmethod
    def load(cls, space: FiniteMetricMeasureSpace, path: Path) -> "LipschitzFunction":
        try:
            data = json.loads(Path(path).read_text(encoding='utf-8'))
        except FileNotFoundError:
            raise FileNotFoundError(f"Failed to read function file '{path}': File not found")
        except (OSError, json.JSONDecodeError) as e:
            raise SpaceFileError(f"Failed to parse function file '{path}': {e}")
        if not isinstance(data, dict) or 'f' not in data:
            raise SpaceFileError(f"function file '{path}' needs an 'f' field")
        try:
            return cls.on(space, data['f'])
        except (TypeError, ValueError) as e:
            raise SpaceFileError(f"Invalid function in '{path}': {e}", {"n": space.n})


@dataclass(frozen=True, eq=False)
class PushforwardAtoms:
    """f_* mu: sorted distinct positions with their masses."""
    positions: np.ndarray
    masses: np.ndarray

    def __len__(self) -> int:
        return int(self.positions.shape[0])


def mcshane_extend(space: FiniteMetricMeasureSpace, anchors: Dict[int, float],
                   L: float) -> LipschitzFunction:
    """f(x) = min over anchors a of g(a) + L d(x, a)."""
    if not anchors:
        raise ValueError("McShane extension needs at least one anchor")
    if L < 0.0:
        raise ValueError(f"Lipschitz bound must be nonnegative, got {L}")
    points = sorted(anchors)
    g = np.array([anchors[a] for a in points], dtype=float)
    sub = space.dist[np.ix_(points, points)]
    excess = np.abs(g[:, None] - g[None, :]) - L * sub
    if excess.max() > METRIC_TOL * max(1.0, L):
        i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
        raise AnchorsNotLipschitz(
            f"|g({points[i]}) - g({points[j]})| exceeds {L} * d({points[i]},{points[j]})",
            {"a": points[i], "b": points[j], "excess": float(excess[i, j])})
    values = (g[:, None] + L * space.dist[points]).min(axis=0)
    return LipschitzFunction.on(space, values)


def shrink_to_lipschitz(f: LipschitzFunction, L: float = 1.0) -> LipschitzFunction:
    """Scale f by L / max(L, lip(f)); already L-Lipschitz functions are returned as is."""
    if L <= 0.0:
        raise ValueError(f"Lipschitz bound must be positive, got {L}")
    if f.lip <= L:
        return f
    return f.scaled(L / f.lip)


def pushforward(space: FiniteMetricMeasureSpace, f: LipschitzFunction) -> PushforwardAtoms:
    positions, inverse = np.unique(f.values, return_inverse=True)
    masses = np.bincount(inverse.reshape(-1), weights=space.weight, minlength=len(positions))
    return PushforwardAtoms(positions=positions, masses=masses)


def window_width(values: np.ndarray, weight: np.ndarray, kappa: float) -> float:
    """Narrowest interval [a, b] carrying mass >= 1 - kappa under sum(weight * delta_values)."""
    order = np.argsort(values, kind='stable')
    pos = values[order]
    cum = np.concatenate([[0.0], np.cumsum(weight[order])])
    need = 1.0 - kappa - MASS_TOL
    ends = np.searchsorted(cum, cum[:-1] + need, side='left')
    valid = ends <= len(pos)
    starts = np.flatnonzero(valid)
    last = np.maximum(ends[valid] - 1, starts)
    if starts.size == 0:
        return float(pos[-1] - pos[0])
    return float((pos[last] - pos[starts]).min())


def partial_diameter_line(atoms: PushforwardAtoms, kappa: float) -> float:
    """Partial diameter of f_* mu on the screen R at mass level 1 - kappa."""
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    return window_width(atoms.positions, atoms.masses, kappa)


def partial_diameter_space(space: FiniteMetricMeasureSpace, kappa: float,
                           limit: int = DEFAULT_EXACT_LIMIT) -> float:
    """min diam(A) over subsets A with mu(A) >= 1 - kappa."""
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    solver = exact_solver(space, limit)
    best = np.inf
    for bits in solver.heavy_sets(1.0 - kappa):
        idx = members(bits)
        spread = float(space.dist[np.ix_(idx, idx)].max()) if len(idx) > 1 else 0.0
        if spread < best:
            best = spread
            if best == 0.0:
                break
    return float(best)


def image_space(space: FiniteMetricMeasureSpace,
                f: LipschitzFunction) -> Tuple[FiniteMetricMeasureSpace, PushforwardAtoms]:
    """Y = f(X) in R with distance |s - t| and the pushed masses.

    X Lipschitz dominates Y whenever f is 1-Lipschitz.
    """
    atoms = pushforward(space, f)
    pos = atoms.positions
    dist = np.abs(pos[:, None] - pos[None, :])
    return validate_space(dist, atoms.masses / atoms.masses.sum()), atoms
