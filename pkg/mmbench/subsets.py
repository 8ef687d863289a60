"""Subsets of a finite space as integer bitmasks, and exact set enumeration."""

import weakref
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Tuple

import numpy as np

from .errors import TooLargeForExact
from .space import MASS_TOL, METRIC_TOL, FiniteMetricMeasureSpace

DEFAULT_EXACT_LIMIT = 22
MAX_EXACT_LIMIT = 26


@dataclass(frozen=True)
class SubsetMask:
    """A subset of an n-point space; bit i set means point i belongs to it."""
    bits: int
    n: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"mask {self.bits:#x} does not fit {self.n} points")

    @classmethod
    def of(cls, indices: Iterable[int], n: int) -> "SubsetMask":
        bits = 0
        for i in indices:
            bits |= 1 << int(i)
        return cls(bits, n)

    @classmethod
    def full(cls, n: int) -> "SubsetMask":
        return cls((1 << n) - 1, n)

    def members(self) -> List[int]:
        return members(self.bits)

    def issubset(self, other: "SubsetMask") -> bool:
        return self.bits & ~other.bits == 0

    def __contains__(self, point: int) -> bool:
        return bool(self.bits >> point & 1)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def hex(self) -> str:
        return f"{self.bits:#x}"


def members(bits: int) -> List[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


class MaskMeasure:
    """mu(A) for bitmasks via byte-chunk lookup tables."""

    def __init__(self, weight: np.ndarray):
        self.n = len(weight)
        self.tables = []
        for start in range(0, self.n, 8):
            chunk = [float(x) for x in weight[start:start + 8]]
            table = [0.0] * (1 << len(chunk))
            for byte in range(1, len(table)):
                low = byte & -byte
                table[byte] = table[byte ^ low] + chunk[low.bit_length() - 1]
            self.tables.append(table)

    def __call__(self, bits: int) -> float:
        total = 0.0
        for table in self.tables:
            total += table[bits & 0xFF]
            bits >>= 8
        return total


class ExactSolver:
    """Cached ball masks and set enumerations for one space.

    Enlargements are closed: x is in A_r when min_a d(x, a) <= r (up to 1e-12).
    Never holds the space itself: the solver cache is keyed weakly on it.
    """

    def __init__(self, space: FiniteMetricMeasureSpace):
        self.dist = space.dist
        self.weight = space.weight
        self.n = space.n
        self.full = (1 << self.n) - 1
        self.mass = MaskMeasure(space.weight)
        self._balls: Dict[float, List[int]] = {}
        self._heavy: Dict[float, List[int]] = {}
        self._suffix = np.concatenate([np.cumsum(space.weight[::-1])[::-1], [0.0]]).tolist()

    def balls(self, r: float) -> List[int]:
        """balls(r)[x] is the mask of the closed ball B(x, r)."""
        cached = self._balls.get(r)
        if cached is None:
            inside = self.dist <= r + METRIC_TOL
            weights = 1 << np.arange(self.n, dtype=object)
            cached = [int(weights[row].sum()) for row in inside]
            self._balls[r] = cached
        return cached

    def enlarge(self, bits: int, r: float) -> int:
        balls = self.balls(r)
        out = 0
        while bits:
            low = bits & -bits
            out |= balls[low.bit_length() - 1]
            bits ^= low
        return out

    def heavy_sets(self, threshold: float) -> List[int]:
        """Sets of mass >= threshold found by index-ordered depth-first search.

        A branch stops as soon as the threshold is reached, so every
        inclusion-minimal qualifying set is listed (plus some non-minimal ones).
        Objectives monotone under inclusion only need these.
        """
        cached = self._heavy.get(threshold)
        if cached is not None:
            return cached
        weight = [float(x) for x in self.weight]
        suffix = self._suffix
        target = threshold - MASS_TOL
        found: List[int] = []
        stack: List[Tuple[int, int, float]] = [(0, 0, 0.0)]
        while stack:
            start, bits, mass = stack.pop()
            for i in range(start, self.n):
                if mass + suffix[i] < target:
                    break
                grown = mass + weight[i]
                if grown >= target:
                    found.append(bits | 1 << i)
                else:
                    stack.append((i + 1, bits | 1 << i, grown))
        if not found:
            found.append(self.full)
        self._heavy[threshold] = found
        return found

    def light_sets(self, r: float, bound: float) -> Iterator[Tuple[int, int]]:
        """Nonempty B with mu(B_r) <= bound, yielded as (B, B_r).

        The family is closed under subsets, so a branch is cut once B_r is too heavy.
        """
        balls = self.balls(r)
        limit = bound + MASS_TOL
        stack: List[Tuple[int, int, int]] = [(0, 0, 0)]
        while stack:
            start, bits, enlarged = stack.pop()
            for i in range(start, self.n):
                grown = enlarged | balls[i]
                if self.mass(grown) > limit:
                    continue
                new_bits = bits | 1 << i
                yield new_bits, grown
                stack.append((i + 1, new_bits, grown))


_SOLVERS: "weakref.WeakKeyDictionary[FiniteMetricMeasureSpace, ExactSolver]" = weakref.WeakKeyDictionary()


def exact_solver(space: FiniteMetricMeasureSpace, limit: int = DEFAULT_EXACT_LIMIT) -> ExactSolver:
    """Shared solver for a space, refusing spaces beyond the exact limit."""
    if space.n > limit:
        raise TooLargeForExact(f"space has {space.n} points, exact limit is {limit}",
                               {"n": space.n, "exact_limit": limit})
    solver = _SOLVERS.get(space)
    if solver is None:
        solver = _SOLVERS.setdefault(space, ExactSolver(space))
    return solver
