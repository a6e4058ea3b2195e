"""Perron vector of the random walk and the circulation it induces."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ConvergenceError, NotStronglyConnectedError, SpectralError
from .graph import Graph, components, degrees, transition_matrix

__all__ = [
    "PerronVector",
    "CirculationField",
    "perron_vector",
    "perron_vector_generalized",
    "stationarity_residual",
    "circulation",
    "average_node_circulation",
]


@dataclass(frozen=True)
class PerronVector:
    """Stationary distribution ``phi`` with ``phi^T P = phi^T`` and ``sum(phi) = 1``."""

    phi: np.ndarray
    residual: float
    iterations: int = 0


@dataclass(frozen=True)
class CirculationField:
    """Edge flows ``F_ij = phi_i P_ij`` stored on the sparsity pattern of ``A``."""

    flow: sp.csr_matrix

    def inflow(self) -> np.ndarray:
        return np.asarray(self.flow.sum(axis=0)).ravel()

    def outflow(self) -> np.ndarray:
        return np.asarray(self.flow.sum(axis=1)).ravel()

    def imbalance(self) -> np.ndarray:
        return np.abs(self.inflow() - self.outflow())

    def is_invertible(self, atol: float = 1e-12) -> bool:
        """``F_ij == F_ji`` on every edge."""
        diff = self.flow - self.flow.T
        return diff.nnz == 0 or float(abs(diff).max()) <= atol

    def to_csv(self, g: Graph, path: str | Path) -> None:
        coo = self.flow.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source", "target", "flow"])
            for k in order:
                w.writerow([g.labels[coo.row[k]], g.labels[coo.col[k]], repr(float(coo.data[k]))])


def stationarity_residual(p: sp.spmatrix | np.ndarray, phi: np.ndarray) -> float:
    """Sup norm of ``phi^T P - phi^T``."""
    return float(np.abs(p.T @ phi - phi).max()) if len(phi) else 0.0


def _require_strong(g: Graph, op: str) -> None:
    dec = components(g, "strong")
    if dec.count != 1:
        raise NotStronglyConnectedError(op, dec.count)


def _default_max_iter(n: int) -> int:
    return int(min(100_000, max(1_000, math.ceil(10 * n * math.log(max(n, 2))))))


def perron_vector(
    g: Graph,
    tol: float = 1e-12,
    max_iter: int | None = None,
    refine: bool = True,
) -> PerronVector:
    """Stationary distribution of ``P = D^{-1} A`` on a strongly connected graph.

    Power iteration runs on the lazy chain ``(I + P) / 2``, which shares the
    stationary vector of ``P`` but is aperiodic, so bipartite or cyclic
    graphs converge too. Each step renormalizes to ``sum = 1``; iteration
    stops once ``||phi^T P - phi^T||_inf <= tol`` or after ``max_iter`` steps.

    With ``refine`` a final shifted inverse-iteration step is attempted and
    kept only when it lowers the residual. It brings ``phi`` to working
    precision, which the Perron-weighted Laplacians need for entrywise
    identities at the 1e-12 level, and rescues slowly mixing chains.
    :class:`ConvergenceError` is raised if the residual still exceeds ``tol``.
    """
    n = g.n
    if n == 0:
        raise SpectralError("perron_vector", "empty graph")
    _require_strong(g, "perron_vector")
    p = transition_matrix(g)
    pt = sp.csr_matrix(p.T)
    if max_iter is None:
        max_iter = _default_max_iter(n)
    phi = np.full(n, 1.0 / n)
    residual = float(np.abs(pt @ phi - phi).max())
    it = 0
    while residual > tol and it < max_iter:
        phi = 0.5 * (phi + pt @ phi)
        phi /= phi.sum()
        it += 1
        residual = float(np.abs(pt @ phi - phi).max())
    if refine and n > 1:
        polished = _inverse_iteration(pt, phi)
        if polished is not None:
            r2 = float(np.abs(pt @ polished - polished).max())
            if r2 <= residual:
                phi, residual = polished, r2
    if residual > tol:
        raise ConvergenceError("spectral", "perron_vector", phi, residual, it)
    if phi.min() <= 0:
        raise SpectralError("perron_vector", "non-positive entry in Perron vector")
    return PerronVector(phi=phi, residual=residual, iterations=it)


def _inverse_iteration(pt: sp.csr_matrix, start: np.ndarray, steps: int = 2) -> np.ndarray | None:
    n = pt.shape[0]
    shift = 1.0 + 1e-10
    try:
        lu = splu(sp.csc_matrix(pt - shift * sp.identity(n)))
    except RuntimeError:
        return None
    x = start.copy()
    for _ in range(steps):
        x = lu.solve(x)
        total = x.sum()
        if not np.isfinite(total) or total == 0:
            return None
        x = x / total
    if np.any(x <= 0):
        return None
    return x / x.sum()


def perron_vector_generalized(g: Graph) -> PerronVector:
    """Perron vector via the dense generalized eigenproblem ``A^T u = D u``.

    From ``phi^T D^{-1} A = phi^T`` one gets ``A^T (D^{-1} phi) = D (D^{-1} phi)``,
    so ``phi = D u`` up to scale. Used as an independent cross-check of
    :func:`perron_vector`; dense, so meant for small graphs.
    """
    n = g.n
    if n == 0:
        raise SpectralError("perron_vector_generalized", "empty graph")
    _require_strong(g, "perron_vector_generalized")
    p = transition_matrix(g)
    a = g.dense()
    d = degrees(g, "out")
    vals, vecs = scipy.linalg.eig(a.T, np.diag(d))
    k = int(np.argmin(np.abs(vals - 1.0)))
    u = np.real(vecs[:, k])
    phi = d * u
    phi = phi / phi.sum()  # sign flip and scale in one step
    return PerronVector(phi=phi, residual=stationarity_residual(p, phi))


def circulation(g: Graph, perron: PerronVector | np.ndarray) -> CirculationField:
    """Circulation ``F_ij = phi_i P_ij`` induced by the Perron vector."""
    phi = perron.phi if isinstance(perron, PerronVector) else np.asarray(perron, dtype=float)
    if phi.shape != (g.n,):
        raise SpectralError("circulation", f"Perron vector has length {phi.size}, graph has {g.n} nodes")
    p = transition_matrix(g)
    return CirculationField(flow=sp.csr_matrix(sp.diags(phi) @ p))


def average_node_circulation(g: Graph, field: CirculationField) -> np.ndarray:
    """``sum_j F_ij / D^+(i)`` for every node."""
    if field.flow.shape != (g.n, g.n):
        raise SpectralError("average_node_circulation", "circulation does not match graph size")
    d = degrees(g, "out")
    if np.any(d <= 0):
        bad = [g.labels[i] for i in np.flatnonzero(d <= 0)[:10]]
        raise SpectralError("average_node_circulation", f"zero out-degree at {bad}")
    return field.outflow() / d
