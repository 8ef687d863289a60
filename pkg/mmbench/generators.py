"""Canonical finite metric measure spaces."""

import logging
from typing import Optional

import numpy as np

from .errors import SizeOverflow
from .space import FiniteMetricMeasureSpace, uniform_weights, validate_space

logger = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 4096
KINDS = ("cycle", "hypercube", "path", "sphere", "random")


class SpaceGenerator:
    """Builds cycles, hypercubes, paths, sampled spheres and random metrics."""

    def __init__(self, max_points: int = DEFAULT_MAX_POINTS):
        self.max_points = max_points

    def _guard(self, kind: str, n: int) -> None:
        if n < 1:
            raise ValueError(f"{kind} needs at least one point, got {n}")
        if n > self.max_points:
            raise SizeOverflow(f"{kind} would have {n} points, limit is {self.max_points}",
                               {"kind": kind, "n": n, "max_points": self.max_points})

    def cycle(self, n: int) -> FiniteMetricMeasureSpace:
        """Shortest-path metric on the n-cycle, uniform weights."""
        self._guard("cycle", n)
        i = np.arange(n)
        gap = np.abs(i[:, None] - i[None, :])
        return validate_space(np.minimum(gap, n - gap), uniform_weights(n))

    def path(self, n: int) -> FiniteMetricMeasureSpace:
        """Path graph with unit edges, uniform weights."""
        self._guard("path", n)
        i = np.arange(n)
        return validate_space(np.abs(i[:, None] - i[None, :]), uniform_weights(n))

    def hypercube(self, d: int) -> FiniteMetricMeasureSpace:
        """Hamming cube {0,1}^d, uniform weights."""
        if d < 0:
            raise ValueError(f"hypercube dimension must be nonnegative, got {d}")
        if d >= 63:
            raise SizeOverflow(f"hypercube({d}) is far beyond the point limit",
                               {"kind": "hypercube", "max_points": self.max_points})
        n = 1 << d
        self._guard("hypercube", n)
        i = np.arange(n)
        xor = i[:, None] ^ i[None, :]
        dist = np.zeros((n, n))
        for bit in range(d):
            dist += (xor >> bit) & 1
        return validate_space(dist, uniform_weights(n))

    def sampled_sphere(self, n: int, delta: float, count: int,
                       seed: int = 0) -> FiniteMetricMeasureSpace:
        """count i.i.d. uniform points on S^n(delta) with geodesic distance.

        Uniform sample weights stand in for the normalized sphere measure.
        """
        if n < 1 or delta <= 0.0:
            raise ValueError(f"sphere needs n >= 1 and delta > 0, got n={n}, delta={delta}")
        self._guard("sphere", count)
        rng = np.random.default_rng(seed)
        points = rng.standard_normal((count, n + 1))
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        cosines = np.clip(points @ points.T, -1.0, 1.0)
        dist = delta * np.arccos(cosines)
        np.fill_diagonal(dist, 0.0)
        dist = 0.5 * (dist + dist.T)
        # geodesic distance is a metric; the O(n^3) scan is only run on small samples
        return validate_space(dist, uniform_weights(count), check_triangle=count <= 512)

    def random_metric(self, n: int, seed: int = 0,
                      uniform: bool = False) -> FiniteMetricMeasureSpace:
        """Random symmetric positive draw closed under shortest paths."""
        self._guard("random", n)
        rng = np.random.default_rng(seed)
        raw = rng.uniform(0.1, 1.0, size=(n, n))
        dist = np.triu(raw, k=1)
        dist = dist + dist.T
        for k in range(n):
            dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
        if uniform:
            weight = np.full(n, 1.0 / n)
        else:
            weight = rng.uniform(0.5, 1.5, size=n)
            weight = weight / weight.sum()
        return validate_space(dist, weight)

    def from_spec(self, kind: str, seed: int = 0) -> FiniteMetricMeasureSpace:
        """Build a space from a spec string such as 'cycle:6' or 'sphere:2,1.0,2000'."""
        name, _, args = kind.partition(':')
        name = name.strip().lower()
        values = [a.strip() for a in args.split(',') if a.strip()]
        try:
            if name == "cycle":
                return self.cycle(int(values[0]))
            if name == "path":
                return self.path(int(values[0]))
            if name == "hypercube":
                return self.hypercube(int(values[0]))
            if name == "sphere":
                return self.sampled_sphere(int(values[0]), float(values[1]),
                                           int(values[2]), seed)
            if name == "random":
                return self.random_metric(int(values[0]), seed)
        except IndexError:
            raise ValueError(f"Missing size arguments in space kind '{kind}'")
        raise ValueError(f"Unknown space kind '{name}', expected one of {', '.join(KINDS)}")


def generate(kind: str, seed: int = 0,
             max_points: Optional[int] = None) -> FiniteMetricMeasureSpace:
    """Convenience function to build a canonical space."""
    return SpaceGenerator(max_points or DEFAULT_MAX_POINTS).from_spec(kind, seed)
