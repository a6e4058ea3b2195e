"""Core graph representation and connectivity machinery.

A :class:`Graph` stores a compressed-row weighted adjacency matrix together
with node labels and an optional planar embedding. Graphs are immutable:
the sparse buffers are flagged read-only on construction and every
operation here returns new objects.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from ._parallel import chunks, pmap
from .errors import GraphError

__all__ = [
    "Graph",
    "ComponentDecomposition",
    "build_graph",
    "degrees",
    "shortest_path_distances",
    "distance_rows",
    "components",
    "is_strongly_connected",
    "largest_component_subgraph",
    "prune_low_degree",
    "subgraph",
    "transition_matrix",
    "sparsity_pattern",
    "reciprocal_weights",
]

log = logging.getLogger(__name__)

Orientation = Literal["out", "in"]
ComponentMode = Literal["weak", "strong"]


def _freeze(m: sp.csr_matrix) -> sp.csr_matrix:
    for arr in (m.data, m.indices, m.indptr):
        arr.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class Graph:
    """Weighted graph ``G = (V, E, A)``.

    Parameters
    ----------
    directed : bool
        Whether edge ``(u, v)`` differs from ``(v, u)``.
    adjacency : scipy.sparse.csr_matrix
        ``n x n`` matrix of strictly positive edge weights; absent entries are
        zero weight.
    labels : tuple of str
        Unique external node ids, in index order.
    coords : ndarray, optional
        ``(n, 2)`` planar node coordinates.
    """

    directed: bool
    adjacency: sp.csr_matrix
    labels: tuple[str, ...]
    coords: np.ndarray | None = None
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        a = sp.csr_matrix(self.adjacency, dtype=float, copy=True)
        a.eliminate_zeros()
        a.sum_duplicates()
        a.sort_indices()
        n = a.shape[0]
        if a.shape != (n, n):
            raise GraphError("build_graph", f"adjacency must be square, got {a.shape}")
        if a.nnz and (not np.all(np.isfinite(a.data)) or a.data.min() <= 0):
            raise GraphError("build_graph", "edge weights must be finite and strictly positive")
        if not self.directed and a.nnz and abs(a - a.T).max() != 0:
            raise GraphError("build_graph", "undirected graph needs a symmetric adjacency")
        labels = tuple(str(x) for x in self.labels)
        if len(labels) != n:
            raise GraphError("build_graph", f"{len(labels)} labels for {n} nodes")
        if len(set(labels)) != n:
            raise GraphError("build_graph", "node labels must be unique")
        coords = self.coords
        if coords is not None:
            coords = np.array(coords, dtype=float).reshape(-1, 2)
            if coords.shape[0] != n:
                raise GraphError("build_graph", f"{coords.shape[0]} coordinates for {n} nodes")
            coords.flags.writeable = False
        object.__setattr__(self, "adjacency", _freeze(a))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        """Number of stored arcs (an undirected edge counts once)."""
        if self.directed:
            return self.adjacency.nnz
        diag = int(np.count_nonzero(self.adjacency.diagonal()))
        return (self.adjacency.nnz - diag) // 2 + diag

    @property
    def is_empty(self) -> bool:
        return self.n == 0

    def index(self, label: str | int) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise GraphError("index", f"unknown node {label!r}") from None

    def dense(self) -> np.ndarray:
        return self.adjacency.toarray()

    def edges(self) -> Iterable[tuple[str, str, float]]:
        """Yield ``(source, target, weight)``; undirected edges once, ``u <= v``."""
        coo = self.adjacency.tocoo()
        for i, j, w in zip(coo.row, coo.col, coo.data):
            if self.directed or i <= j:
                yield self.labels[i], self.labels[j], float(w)

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({kind}, n={self.n}, edges={self.n_edges})"


@dataclass(frozen=True)
class ComponentDecomposition:
    mode: ComponentMode
    assignment: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sizes)


def build_graph(
    edges: Iterable[tuple[str, str, float]],
    directed: bool,
    coords: Mapping[str, Sequence[float]] | None = None,
    nodes: Sequence[str] | None = None,
) -> Graph:
    """Build a graph from ``(source, target, weight)`` triples.

    Node order is ``nodes`` when given (which also allows isolated nodes),
    otherwise order of first appearance in ``edges``.
    """
    order: dict[str, int] = {}
    if nodes is not None:
        for lab in nodes:
            lab = str(lab)
            if lab in order:
                raise GraphError("build_graph", f"duplicate node {lab!r}")
            order[lab] = len(order)
    rows, cols, vals = [], [], []
    seen: set[tuple[str, str]] = set()
    for src, dst, w in edges:
        src, dst, w = str(src), str(dst), float(w)
        key = (src, dst) if directed else tuple(sorted((src, dst)))
        if key in seen:
            raise GraphError("build_graph", f"duplicate edge ({src!r}, {dst!r})")
        seen.add(key)
        if not w > 0 or not np.isfinite(w):
            raise GraphError("build_graph", f"non-positive weight {w} on edge ({src!r}, {dst!r})")
        for lab in (src, dst):
            if lab not in order:
                if nodes is not None:
                    raise GraphError("build_graph", f"edge endpoint {lab!r} not in node list")
                order[lab] = len(order)
        i, j = order[src], order[dst]
        rows.append(i)
        cols.append(j)
        vals.append(w)
        if not directed and i != j:
            rows.append(j)
            cols.append(i)
            vals.append(w)
    n = len(order)
    a = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=float)
    labels = tuple(order)
    xy = None
    if coords is not None:
        missing = [lab for lab in labels if lab not in coords]
        if missing:
            raise GraphError("build_graph", f"missing coordinates for {missing[:5]}")
        xy = np.array([coords[lab] for lab in labels], dtype=float).reshape(n, 2)
    return Graph(directed=directed, adjacency=a, labels=labels, coords=xy)


def degrees(g: Graph, orientation: Orientation = "out") -> np.ndarray:
    """Weighted out-degree (row sums) or in-degree (column sums)."""
    if orientation not in ("out", "in"):
        raise GraphError("degrees", f"orientation must be 'out' or 'in', got {orientation!r}")
    axis = 1 if orientation == "out" else 0
    return np.asarray(g.adjacency.sum(axis=axis)).ravel()


def distance_rows(g: Graph, sources: Sequence[int] | None = None, reverse: bool = False) -> np.ndarray:
    """Dijkstra distances from each source, shape ``(len(sources), n)``.

    With ``reverse`` the arcs are flipped, so row ``k`` holds ``d(i, sources[k])``.
    """
    a = g.adjacency.T.tocsr() if reverse and g.directed else g.adjacency
    if sources is None:
        sources = range(g.n)
    sources = np.asarray(list(sources), dtype=np.int64)
    if len(sources) == 0:
        return np.zeros((0, g.n))
    parts = pmap(
        lambda r: csgraph.dijkstra(a, directed=True, indices=sources[r.start : r.stop]),
        chunks(len(sources), 128),
    )
    return np.vstack(parts)


def shortest_path_distances(g: Graph, source: str | int) -> np.ndarray:
    """Distances ``d(source, v)`` using edge weights as traversal costs.

    ``source`` is a label, or an integer index when no label matches.
    Unreachable nodes get ``inf``.
    """
    src = _resolve(g, source, "shortest_path_distances")
    return distance_rows(g, [src])[0]


def _resolve(g: Graph, node: str | int, op: str) -> int:
    key = str(node)
    if key in g._index:
        return g._index[key]
    if isinstance(node, (int, np.integer)) and 0 <= node < g.n:
        return int(node)
    raise GraphError(op, f"unknown node {node!r}")


def components(g: Graph, mode: ComponentMode = "weak") -> ComponentDecomposition:
    """Weak or strong components, numbered by their smallest node index."""
    if mode not in ("weak", "strong"):
        raise GraphError("components", f"mode must be 'weak' or 'strong', got {mode!r}")
    if g.n == 0:
        return ComponentDecomposition(mode, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    connection = "strong" if (mode == "strong" and g.directed) else "weak"
    _, raw = csgraph.connected_components(g.adjacency, directed=True, connection=connection)
    # renumber so component k is the k-th one met when scanning node indices
    _, first = np.unique(raw, return_index=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    assignment = rank[raw]
    sizes = np.bincount(assignment)
    return ComponentDecomposition(mode, assignment, sizes)


def is_strongly_connected(g: Graph) -> bool:
    return g.n > 0 and components(g, "strong").count == 1


def subgraph(g: Graph, keep: Sequence[int] | np.ndarray) -> Graph:
    keep = np.asarray(keep, dtype=np.int64)
    a = g.adjacency[keep][:, keep]
    coords = None if g.coords is None else g.coords[keep]
    return Graph(
        directed=g.directed,
        adjacency=a,
        labels=tuple(g.labels[i] for i in keep),
        coords=coords,
    )


def largest_component_subgraph(g: Graph, mode: ComponentMode = "strong") -> tuple[Graph, dict[int, int]]:
    """Restrict ``g`` to its largest component.

    Ties go to the component holding the smallest original node index, which
    is the lowest component number under :func:`components`' numbering.

    Returns
    -------
    sub : Graph
    mapping : dict
        Original node index to index in ``sub``.
    """
    if g.n == 0:
        return g, {}
    dec = components(g, mode)
    best = int(np.argmax(dec.sizes))  # argmax returns the first maximum
    keep = np.flatnonzero(dec.assignment == best)
    return subgraph(g, keep), {int(old): new for new, old in enumerate(keep)}


def _neighbour_counts(g: Graph) -> np.ndarray:
    pattern = (g.adjacency != 0).astype(np.int8)
    pattern = ((pattern + pattern.T) != 0).tolil()
    pattern.setdiag(0)
    return np.asarray(pattern.tocsr().sum(axis=1)).ravel()


def prune_low_degree(g: Graph, threshold: int = 1, iterate: bool = False) -> Graph:
    """Drop nodes whose unweighted degree is ``<= threshold``.

    Degree here counts distinct neighbours ignoring direction and self-loops.
    A single pass judges every node on the input graph; ``iterate`` repeats
    until nothing changes. An empty result is returned as a zero-node graph
    and logged as a warning.
    """
    if threshold < 0:
        raise GraphError("prune_low_degree", f"threshold must be >= 0, got {threshold}")
    current = g
    while True:
        keep = np.flatnonzero(_neighbour_counts(current) > threshold)
        if len(keep) == current.n:
            break
        current = subgraph(current, keep)
        if not iterate or current.n == 0:
            break
    if current.n == 0:
        log.warning("prune_low_degree removed every node (threshold=%d)", threshold)
    return current


def transition_matrix(g: Graph) -> sp.csr_matrix:
    """Row-stochastic ``P = D^{-1} A``; rejects dead-end nodes."""
    d = degrees(g, "out")
    dead = np.flatnonzero(d <= 0)
    if len(dead):
        names = [g.labels[i] for i in dead[:10]]
        more = "" if len(dead) <= 10 else f" (+{len(dead) - 10} more)"
        raise GraphError("transition_matrix", f"dead-end nodes with zero out-degree: {names}{more}")
    p = sp.diags(1.0 / d) @ g.adjacency
    return sp.csr_matrix(p)


def sparsity_pattern(g: Graph) -> list[tuple[int, int]]:
    coo = g.adjacency.tocoo()
    return sorted(zip(coo.row.tolist(), coo.col.tolist()))


def reciprocal_weights(g: Graph) -> Graph:
    """Same topology with weights ``1 / w``, turning flows into travel costs."""
    a = g.adjacency.copy()
    a.data = 1.0 / a.data
    return Graph(directed=g.directed, adjacency=a, labels=g.labels, coords=g.coords)
