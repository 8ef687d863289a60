"""Finite metric measure spaces: validation, parameters and JSON documents."""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    AsymmetricDistance,
    InvalidDistance,
    MassNotOne,
    NonpositiveWeight,
    ShapeMismatch,
    SpaceFileError,
    TriangleViolation,
)

logger = logging.getLogger(__name__)

METRIC_TOL = 1e-12
MASS_TOL = 1e-12
RENORMALIZE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FiniteMetricMeasureSpace:
    """The triplet (X, d, mu) on points 0..n-1. Build it with validate_space."""
    dist: np.ndarray
    weight: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    @property
    def n(self) -> int:
        return int(self.weight.shape[0])

    @property
    def diameter(self) -> float:
        return diameter(self)

    def distances(self) -> np.ndarray:
        """Sorted distinct positive pairwise distances."""
        if self.n < 2:
            return np.zeros(0)
        upper = self.dist[np.triu_indices(self.n, k=1)]
        return np.unique(upper)

    def permuted(self, order: Sequence[int]) -> "FiniteMetricMeasureSpace":
        """Relabel points so that new point i is old point order[i]."""
        idx = np.asarray(order, dtype=int)
        labels = tuple(self.labels[i] for i in idx) if self.labels else None
        return validate_space(self.dist[np.ix_(idx, idx)], self.weight[idx], labels)


@dataclass
class SpaceParams:
    """Parameters shared by the concentration and expansion quantities."""
    epsilon: float = 0.5
    kappa: float = 0.1
    rho: float = 1.0
    lam: float = 1.0
    r: float = 0.0

    @property
    def k(self) -> int:
        """Interpolation index floor(r / rho)."""
        return int(math.floor(self.r / self.rho + METRIC_TOL))

    def validate(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.rho <= 0.0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.lam <= 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.r < 0.0:
            raise ValueError(f"r must be nonnegative, got {self.r}")


def validate_space(dist, weight, labels: Optional[Sequence[str]] = None,
                   check_triangle: bool = True) -> FiniteMetricMeasureSpace:
    """Validate a distance matrix and weights and return an immutable space.

    Matrices are rejected, never repaired. Weights are renormalized only when
    their sum is within 1e-9 of one.
    """
    try:
        d = np.array(dist, dtype=float, copy=True)
        w = np.array(weight, dtype=float, copy=True).reshape(-1)
    except (TypeError, ValueError) as e:
        raise ShapeMismatch(f"distances and weights must be numeric arrays: {e}")
    if labels is not None and (isinstance(labels, str) or not isinstance(labels, Sequence)):
        raise ShapeMismatch(f"labels must be a list of strings, got {type(labels).__name__}")

    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ShapeMismatch(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    if n < 1:
        raise ShapeMismatch("a space needs at least one point")
    if w.shape[0] != n:
        raise ShapeMismatch(f"expected {n} weights, got {w.shape[0]}",
                            {"n": n, "weights": int(w.shape[0])})
    if labels is not None and len(labels) != n:
        raise ShapeMismatch(f"expected {n} labels, got {len(labels)}")

    if not np.all(np.isfinite(d)):
        raise InvalidDistance("distance matrix contains non-finite entries")
    if np.any(np.abs(np.diag(d)) > METRIC_TOL):
        i = int(np.argmax(np.abs(np.diag(d))))
        raise InvalidDistance(f"d({i},{i}) = {d[i, i]!r} is not zero", {"point": i})

    asym = np.abs(d - d.T)
    if n > 1 and asym.max() > METRIC_TOL:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise AsymmetricDistance(
            f"d({i},{j}) = {d[i, j]!r} but d({j},{i}) = {d[j, i]!r}",
            {"i": int(i), "j": int(j), "gap": float(asym[i, j])})

    off = ~np.eye(n, dtype=bool)
    if np.any(d[off] <= 0.0):
        i, j = np.argwhere(off & (d <= 0.0))[0]
        raise InvalidDistance(f"distinct points {i} and {j} have distance {d[i, j]!r}",
                              {"i": int(i), "j": int(j)})

    if check_triangle and n > 2:
        _check_triangle(d)

    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        i = int(np.argmin(np.where(np.isfinite(w), w, -np.inf)))
        raise NonpositiveWeight(f"weight[{i}] = {w[i]!r} is not strictly positive", {"point": i})
    total = float(w.sum())
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise MassNotOne(f"weights sum to {total!r}, expected 1", {"total": total})
    if abs(total - 1.0) > MASS_TOL:
        logger.debug("renormalizing weights summing to %r", total)
        w = w / total

    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    d.setflags(write=False)
    w.setflags(write=False)
    return FiniteMetricMeasureSpace(dist=d, weight=w,
                                    labels=tuple(labels) if labels is not None else None)


def _check_triangle(d: np.ndarray) -> None:
    """Raise TriangleViolation naming the worst triple (i, j, k)."""
    worst = 0.0
    triple = None
    for j in range(d.shape[0]):
        # excess[i, k] = d(i, k) - d(i, j) - d(j, k)
        excess = d - d[:, j, None] - d[None, j, :]
        flat = int(np.argmax(excess))
        value = float(excess.flat[flat])
        if value > worst:
            i, k = np.unravel_index(flat, excess.shape)
            worst, triple = value, (int(i), j, int(k))
    if triple is not None and worst > METRIC_TOL:
        i, j, k = triple
        raise TriangleViolation(
            f"d({i},{k}) = {d[i, k]!r} exceeds d({i},{j}) + d({j},{k}) = {d[i, j] + d[j, k]!r}",
            {"i": i, "j": j, "k": k, "excess": worst})


def diameter(space: FiniteMetricMeasureSpace) -> float:
    """Largest pairwise distance; 0 for a single point."""
    if space.n < 2:
        return 0.0
    return float(space.dist.max())


class SpaceIO:
    """Reader and writer for the JSON space document."""

    @staticmethod
    def load(path: Path) -> FiniteMetricMeasureSpace:
        """Read and validate a space document from disk."""
        try:
            content = Path(path).read_text(encoding='utf-8')
        except FileNotFoundError:
            raise FileNotFoundError(f"Failed to read space file '{path}': File not found")
        except OSError as e:
            raise SpaceFileError(f"Failed to read space file '{path}': {e}")
        return SpaceIO.loads(content)

    @staticmethod
    def loads(content: str) -> FiniteMetricMeasureSpace:
        """Parse and validate a space document."""
        try:
            data = json.loads(content)
        except json.JSONDecodeError as e:
            raise SpaceFileError(f"Failed to parse space document: {e}")
        return SpaceIO.from_dict(data)

    @staticmethod
    def from_dict(data: dict) -> FiniteMetricMeasureSpace:
        if not isinstance(data, dict) or 'dist' not in data or 'weight' not in data:
            raise SpaceFileError("space document needs 'dist' and 'weight' fields")
        space = validate_space(data['dist'], data['weight'], data.get('labels'))
        declared = data.get('n', space.n)
        if isinstance(declared, bool) or not isinstance(declared, int):
            raise SpaceFileError(f"field 'n' must be an integer, got {data['n']!r}")
        if declared != space.n:
            raise ShapeMismatch(f"document declares n={data['n']} but holds {space.n} points")
        return space

    @staticmethod
    def to_dict(space: FiniteMetricMeasureSpace) -> dict:
        result = {
            'n': space.n,
            'dist': space.dist.tolist(),
            'weight': space.weight.tolist(),
        }
        if space.labels:
            result['labels'] = list(space.labels)
        return result

    @staticmethod
    def dumps(space: FiniteMetricMeasureSpace) -> str:
        # repr of a float is the shortest string that round-trips bit-exactly
        return json.dumps(SpaceIO.to_dict(space))

    @staticmethod
    def dump(space: FiniteMetricMeasureSpace, path: Path) -> None:
        try:
            Path(path).write_text(SpaceIO.dumps(space), encoding='utf-8')
        except OSError as e:
            raise SpaceFileError(f"Failed to write space file '{path}': {e}")


def uniform_weights(n: int) -> List[float]:
    return [1.0 / n] * n
