"""Node centrality metrics.

Distances use edge weights as traversal costs. Betweenness sums over
*ordered* node pairs for both directed and undirected graphs, with no
halving and no ``(N-1)(N-2)`` rescaling.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field
from itertools import count
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp

from ._parallel import chunks, pmap
from .errors import CentralityError, ConvergenceError
from .graph import Graph, Orientation, degrees, distance_rows

__all__ = [
    "closeness",
    "harmonic",
    "betweenness",
    "pagerank",
    "normalize",
    "quartile_bins",
    "MetricTable",
    "TIE_RTOL",
]

# path costs equal within this relative tolerance count as tied
TIE_RTOL = 1e-12

_CHUNK = 256


def _distance_sums(g: Graph, orientation: Orientation, op: str):
    if orientation not in ("out", "in"):
        raise CentralityError(op, f"orientation must be 'out' or 'in', got {orientation!r}")
    if g.n < 2:
        raise CentralityError(op, f"needs at least 2 nodes, got {g.n}")
    reverse = orientation == "in"

    def block(r: range):
        d = distance_rows(g, r, reverse=reverse)
        d[np.arange(len(r)), np.arange(r.start, r.stop)] = np.inf  # drop d(v, v)
        with np.errstate(divide="ignore"):
            inv = np.where(np.isfinite(d), 1.0 / d, 0.0)
        reach_all = np.isfinite(d).sum(axis=1) == g.n - 1
        total = np.where(np.isfinite(d), d, 0.0).sum(axis=1)
        return total, reach_all, inv.sum(axis=1)

    parts = [block(r) for r in chunks(g.n, _CHUNK)]
    total = np.concatenate([p[0] for p in parts])
    reach_all = np.concatenate([p[1] for p in parts])
    inv_sum = np.concatenate([p[2] for p in parts])
    return total, reach_all, inv_sum


def closeness(g: Graph, orientation: Orientation = "out") -> np.ndarray:
    """Out- or in-closeness ``(N-1) / sum_i d(v, i)``.

    A node that cannot reach (or be reached by) every other node gets 0.
    """
    total, reach_all, _ = _distance_sums(g, orientation, "closeness")
    out = np.zeros(g.n)
    ok = reach_all & (total > 0)
    out[ok] = (g.n - 1) / total[ok]
    return out


def harmonic(g: Graph, orientation: Orientation = "out") -> np.ndarray:
    """Out- or in-harmonic centrality ``sum_i 1/d(v, i) / (N-1)``; unreachable terms add 0."""
    _, _, inv_sum = _distance_sums(g, orientation, "harmonic")
    return inv_sum / (g.n - 1)


def _tied(a: float, b: float) -> bool:
    return abs(a - b) <= TIE_RTOL * max(abs(a), abs(b))


def _single_source(indptr, indices, weights, n: int, s: int) -> np.ndarray:
    """Dependency of ``s`` on every node (Brandes accumulation, weighted)."""
    sigma = [0.0] * n
    sigma[s] = 1.0
    preds: list[list[int]] = [[] for _ in range(n)]
    dist: dict[int, float] = {}
    seen = {s: 0.0}
    order: list[int] = []
    c = count()
    heap = [(0.0, next(c), s, s)]
    while heap:
        d, _, pred, v = heapq.heappop(heap)
        if v in dist:
            continue
        if pred != v:
            sigma[v] += sigma[pred]
        order.append(v)
        dist[v] = d
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            vw = d + weights[k]
            if w in dist:
                continue
            old = seen.get(w)
            if old is None or (vw < old and not _tied(vw, old)):
                seen[w] = vw
                heapq.heappush(heap, (vw, next(c), v, w))
                sigma[w] = 0.0
                preds[w] = [v]
            elif _tied(vw, old):
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = [0.0] * n
    contrib = np.zeros(n)
    for w in reversed(order):
        coeff = (1.0 + delta[w]) / sigma[w]
        for v in preds[w]:
            delta[v] += sigma[v] * coeff
        if w != s:
            contrib[w] = delta[w]
    return contrib


def betweenness(g: Graph) -> np.ndarray:
    """Shortest-path betweenness summed over ordered pairs ``(a, b)``.

    ``B(v) = sum |S_v(a, b)| / |S(a, b)|`` over pairs with ``a, b != v``,
    ``a != b`` and at least one path from ``a`` to ``b``. Each source runs
    a Dijkstra search that records shortest-path predecessors and path
    counts, then back-propagates dependencies in order of decreasing
    distance.
    """
    n = g.n
    if n == 0:
        return np.zeros(0)
    a = g.adjacency
    indptr = a.indptr.tolist()
    indices = a.indices.tolist()
    weights = a.data.tolist()

    def block(r: range) -> np.ndarray:
        acc = np.zeros(n)
        for s in r:
            acc += _single_source(indptr, indices, weights, n, s)
        return acc

    return np.sum(pmap(block, chunks(n, max(1, n // 8 + 1))), axis=0)


def pagerank(
    g: Graph,
    damping: float = 0.85,
    teleport: Sequence[float] | np.ndarray | None = None,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    scaled: bool = False,
) -> np.ndarray:
    """PageRank by power iteration on the Google matrix.

    The Google matrix is ``c (P + delta b^T) + (1 - c) 1 b^T`` where rows of
    dead-end nodes (``delta_i = 1``) are replaced by the teleport vector
    ``b``. Iteration stops once successive iterates differ by at most
    ``tol`` in L1 norm.

    Parameters
    ----------
    damping : float
        ``c`` in (0, 1).
    teleport : array_like, optional
        Teleport distribution ``b``; uniform by default.
    scaled : bool
        Multiply by ``N`` to match the recursive ``(1 - c) + c * ...``
        convention, which agrees for uniform teleport and no dead-ends.

    Returns
    -------
    ndarray
        Stationary vector summing to 1 (or to ``N`` when ``scaled``).
    """
    n = g.n
    if not 0 < damping < 1:
        raise CentralityError("pagerank", f"damping must lie in (0, 1), got {damping}")
    if n == 0:
        return np.zeros(0)
    if teleport is None:
        b = np.full(n, 1.0 / n)
    else:
        b = np.asarray(teleport, dtype=float)
        if b.shape != (n,) or np.any(b < 0) or not math.isclose(b.sum(), 1.0, abs_tol=1e-12):
            raise CentralityError("pagerank", "teleport must be a length-n probability vector")
    d = degrees(g, "out")
    dead = d <= 0
    inv = np.zeros(n)
    inv[~dead] = 1.0 / d[~dead]
    pt = sp.csr_matrix((sp.diags(inv) @ g.adjacency).T)
    x = b.copy()
    residual = np.inf
    for it in range(1, max_iter + 1):
        nxt = damping * (pt @ x) + (damping * x[dead].sum() + (1.0 - damping)) * b
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - x).sum())
        x = nxt
        if residual <= tol:
            return x * n if scaled else x
    raise ConvergenceError("centrality", "pagerank", x, residual, max_iter)


def normalize(values: Sequence[float] | np.ndarray, method: Literal["max", "minmax"] = "max") -> np.ndarray:
    """Rescale into [0, 1] by the maximum (default) or by min-max."""
    v = np.asarray(values, dtype=float)
    if method == "max":
        top = v.max(initial=0.0)
        if not top > 0:
            raise CentralityError("normalize", "needs at least one strictly positive value")
        if v.min() < 0:
            raise CentralityError("normalize", "max normalization needs non-negative values")
        return v / top
    if method == "minmax":
        lo, hi = v.min(), v.max()
        if not hi > lo:
            raise CentralityError("normalize", "min-max normalization of a constant vector")
        return (v - lo) / (hi - lo)
    raise CentralityError("normalize", f"unknown method {method!r}")


def quartile_bins(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Quartile class 1-4 of each value.

    Cut points are inclusive-rank quartiles (averaging at ties in the
    empirical CDF); bin ``k`` holds values in ``(q_{k-1}, q_k]``, so equal
    values always share a bin.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 4:
        raise CentralityError("quartile_bins", f"needs at least 4 values, got {v.size}")
    q = np.quantile(v, [0.25, 0.5, 0.75], method="averaged_inverted_cdf")
    return np.searchsorted(q, v, side="left").astype(np.int64) + 1


@dataclass
class MetricTable:
    """Per-node metric columns, exportable as CSV.

    Columns keep insertion order; normalized and quartile columns are
    written immediately after their source metric.
    """

    labels: tuple[str, ...]
    columns: dict[str, np.ndarray] = field(default_factory=dict)
    normalized: dict[str, np.ndarray] = field(default_factory=dict)
    quartiles: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.labels = tuple(str(x) for x in self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def add(
        self,
        name: str,
        values: Sequence[float] | np.ndarray,
        normalize_method: Literal["max", "minmax"] | None = None,
        bins: bool = False,
    ) -> None:
        v = np.asarray(values, dtype=float)
        if v.shape != (self.n,):
            raise CentralityError("MetricTable.add", f"column {name!r} has {v.size} values for {self.n} nodes")
        self.columns[name] = v
        if normalize_method is not None:
            self.normalized[name] = normalize(v, normalize_method)
        if bins:
            self.quartiles[name] = quartile_bins(v)

    def header(self) -> list[str]:
        out = ["node"]
        for name in self.columns:
            out.append(name)
            if name in self.normalized:
                out.append(f"{name}_norm")
            if name in self.quartiles:
                out.append(f"{name}_q")
        return out

    def rows(self):
        for i, lab in enumerate(self.labels):
            row: list[object] = [lab]
            for name, col in self.columns.items():
                row.append(repr(float(col[i])))
                if name in self.normalized:
                    row.append(repr(float(self.normalized[name][i])))
                if name in self.quartiles:
                    row.append(int(self.quartiles[name][i]))
            yield row

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.header())
            writer.writerows(self.rows())

    @classmethod
    def read_csv(cls, path: str | Path) -> "MetricTable":
        """Read a table back; ``*_norm`` and ``*_q`` columns are restored as such."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        if not header or header[0] != "node":
            raise CentralityError("MetricTable.read_csv", f"{path}: first column must be 'node'")
        table = cls(labels=tuple(r[0] for r in rows))
        for k, name in enumerate(header[1:], start=1):
            raw = [r[k] for r in rows]
            if name.endswith("_q") and name[:-2] in table.columns:
                table.quartiles[name[:-2]] = np.array([int(x) for x in raw])
            elif name.endswith("_norm") and name[:-5] in table.columns:
                table.normalized[name[:-5]] = np.array([float(x) for x in raw])
            else:
                table.columns[name] = np.array([float(x) if x != "" else np.nan for x in raw])
        return table
