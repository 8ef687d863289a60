"""Spectral gap of a graph built on a finite space, via cyclic Jacobi rotations."""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.sparse.csgraph as csgraph
from scipy import sparse

from .errors import ConfigError, DisconnectedGraph
from .space import METRIC_TOL, FiniteMetricMeasureSpace

logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
GRAPH_RULES = ("unit", "threshold:<t>", "knn:<k>")


@dataclass
class SpectralResult:
    """First nonzero eigenvalue of the mass-relative graph Laplacian.

    The eigenvector has zero mu-mean and unit mu-norm.
    """
    lambda1: float
    eigenvector: np.ndarray
    method: str
    rule: str
    residual: float

    def to_dict(self) -> dict:
        return {'lambda1': self.lambda1, 'eigenvector': self.eigenvector.tolist(),
                'method': self.method, 'rule': self.rule, 'residual': self.residual}


def parse_graph_rule(rule: str) -> Tuple[str, float]:
    """Split a graph rule into its name and argument, rejecting malformed rules."""
    name, _, arg = str(rule).partition(':')
    try:
        if name == "unit" and not arg:
            return name, 1.0
        if name == "threshold" and arg:
            value = float(arg)
            if value > 0.0:
                return name, value
        if name == "knn" and arg:
            value = int(arg)
            if value >= 1:
                return name, float(value)
    except ValueError:
        pass
    raise ConfigError(f"Unknown graph rule '{rule}', expected one of {', '.join(GRAPH_RULES)}",
                      {"graph_rule": rule})


def adjacency(space: FiniteMetricMeasureSpace, rule: str) -> np.ndarray:
    """0/1 adjacency from a rule: unit, threshold:<t> or knn:<k> (symmetrized)."""
    d = space.dist
    off = ~np.eye(space.n, dtype=bool)
    name, arg = parse_graph_rule(rule)
    if name == "unit":
        edges = np.abs(d - 1.0) <= METRIC_TOL
    elif name == "threshold":
        edges = d <= arg + METRIC_TOL
    else:
        k = int(arg)
        masked = np.where(off, d, np.inf)
        nearest = np.argsort(masked, axis=1, kind='stable')[:, :k]
        edges = np.zeros_like(off)
        np.put_along_axis(edges, nearest, True, axis=1)
        edges |= edges.T
    return (edges & off).astype(float)


def _connected(adj: np.ndarray) -> bool:
    num_comp, _ = csgraph.connected_components(sparse.csr_matrix(adj), directed=False)
    return num_comp == 1


def jacobi_eigh(matrix: np.ndarray, tol: float = JACOBI_TOL,
                max_sweeps: int = JACOBI_MAX_SWEEPS) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvector columns of a symmetric matrix by cyclic Jacobi sweeps."""
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.abs(a).max()) if n else 1.0)
    for sweep in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)))
        if off <= tol * scale:
            logger.debug("jacobi converged after %d sweeps", sweep)
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol * scale * 1e-3:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        logger.warning("jacobi did not converge in %d sweeps", max_sweeps)
    return np.diag(a).copy(), v


def lambda1_graph(space: FiniteMetricMeasureSpace, rule: str = "unit") -> SpectralResult:
    """lambda1 of W^-1 L with L = D - A and W = diag(n mu).

    Solved on the symmetric S = W^-1/2 L W^-1/2; for uniform mu this is the
    combinatorial Laplacian.
    """
    adj = adjacency(space, rule)
    if space.n < 2 or not _connected(adj):
        raise DisconnectedGraph(f"graph rule '{rule}' gives a disconnected graph", {"rule": rule})
    laplacian = np.diag(adj.sum(axis=1)) - adj
    w = space.n * space.weight
    root = 1.0 / np.sqrt(w)
    sym = root[:, None] * laplacian * root[None, :]
    values, vectors = jacobi_eigh(sym)
    order = np.argsort(values, kind='stable')
    lam = float(values[order[1]])
    vec = root * vectors[:, order[1]]
    vec -= space.weight @ vec
    vec /= math.sqrt(float(space.weight @ vec ** 2))
    residual = float(np.abs(laplacian @ vec / w - lam * vec).max())
    return SpectralResult(lambda1=lam, eigenvector=vec, method="jacobi", rule=rule, residual=residual)


def rayleigh_quotient(space: FiniteMetricMeasureSpace, adj: np.ndarray, values: np.ndarray) -> float:
    """Dirichlet energy over mu-variance, matching the scaling of lambda1_graph."""
    i, j = np.nonzero(np.triu(adj, 1))
    energy = float(np.sum((values[i] - values[j]) ** 2)) / space.n
    mean = float(space.weight @ values)
    variance = float(space.weight @ (values - mean) ** 2)
    return energy / variance if variance > 0.0 else math.inf
