"""Brute-force reference computations used to check the library.

Nothing here imports the algorithms under test; only the graph container
is shared, and weights are read straight from the dense adjacency.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from mobgraph import Graph, build_graph


def simple_paths_from(adj: np.ndarray, source: int):
    """Yield every simple path starting at ``source`` with its exact cost."""
    n = adj.shape[0]
    stack = [(source, (source,), Fraction(0))]
    while stack:
        v, path, cost = stack.pop()
        yield path, cost
        for w in range(n):
            if adj[v, w] != 0 and w not in path:
                stack.append((w, path + (w,), cost + Fraction(adj[v, w]).limit_denominator(10**9)))


def all_shortest_paths(adj: np.ndarray) -> dict[tuple[int, int], tuple[Fraction, list[tuple[int, ...]]]]:
    """Map ``(a, b)`` (``a != b``, reachable) to its distance and every shortest path."""
    n = adj.shape[0]
    best: dict[tuple[int, int], tuple[Fraction, list]] = {}
    for a in range(n):
        for path, cost in simple_paths_from(adj, a):
            b = path[-1]
            if b == a:
                continue
            cur = best.get((a, b))
            if cur is None or cost < cur[0]:
                best[(a, b)] = (cost, [path])
            elif cost == cur[0]:
                cur[1].append(path)
    return best


def brute_betweenness(g: Graph) -> np.ndarray:
    """Sum over ordered pairs of the share of shortest paths through each node."""
    adj = g.dense()
    out = [Fraction(0)] * g.n
    for (a, b), (_, paths) in all_shortest_paths(adj).items():
        total = len(paths)
        for v in range(g.n):
            if v in (a, b):
                continue
            through = sum(1 for p in paths if v in p[1:-1])
            out[v] += Fraction(through, total)
    return np.array([float(x) for x in out])


def brute_distances(g: Graph) -> np.ndarray:
    adj = g.dense()
    d = np.full((g.n, g.n), np.inf)
    np.fill_diagonal(d, 0.0)
    for (a, b), (cost, _) in all_shortest_paths(adj).items():
        d[a, b] = float(cost)
    return d


def reachability(adj: np.ndarray) -> np.ndarray:
    """Boolean closure ``R[i, j]``: j reachable from i in >= 0 steps, via matrix powers."""
    n = adj.shape[0]
    step = (adj != 0).astype(np.int64)
    reach = np.eye(n, dtype=np.int64)
    power = np.eye(n, dtype=np.int64)
    for _ in range(n):
        power = np.minimum(power @ step, 1)
        reach = np.minimum(reach + power, 1)
    return reach.astype(bool)


def is_irreducible(adj: np.ndarray) -> bool:
    return bool(reachability(adj).all())


def random_graph(
    rng: np.random.Generator,
    n: int,
    p: float,
    directed: bool,
    weights=(1, 2, 3),
    strongly_connected: bool = False,
) -> Graph:
    """Erdos-Renyi style graph with weights drawn from ``weights``.

    ``strongly_connected`` overlays a random Hamiltonian cycle (both
    directions when undirected) so the result is connected.
    """
    edges: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(n):
            if i == j or (not directed and j < i):
                continue
            if rng.random() < p:
                edges[(i, j)] = float(rng.choice(weights))
    if strongly_connected and n > 1:
        perm = rng.permutation(n)
        for k in range(n):
            i, j = int(perm[k]), int(perm[(k + 1) % n])
            key = (i, j) if directed or i < j else (j, i)
            edges.setdefault(key, float(rng.choice(weights)))
    return build_graph(
        [(str(i), str(j), w) for (i, j), w in sorted(edges.items())],
        directed=directed,
        nodes=[str(i) for i in range(n)],
    )


def grid_graph(rows: int, cols: int) -> Graph:
    """4-neighbour lattice with unit weights (rook adjacency of a cell grid)."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((f"{r},{c}", f"{r},{c + 1}", 1.0))
            if r + 1 < rows:
                edges.append((f"{r},{c}", f"{r + 1},{c}", 1.0))
    nodes = [f"{r},{c}" for r in range(rows) for c in range(cols)]
    return build_graph(edges, directed=False, nodes=nodes)
