"""Region Adjacency graphs from polygon partitions, Origin-Destination
digraphs from flow matrices, and the file readers feeding them.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Sequence

import numpy as np
import scipy.sparse as sp
from shapely.geometry import MultiPolygon, Polygon
from shapely.strtree import STRtree

from .errors import ConstructError
from .graph import Graph

__all__ = [
    "Region",
    "Partition",
    "ODMatrix",
    "ring_signed_area",
    "centroid",
    "region_adjacency_graph",
    "od_graph",
    "read_partition_geojson",
    "partition_from_geojson",
    "read_od_csv",
    "write_od_csv",
]

Contiguity = Literal["queen", "rook"]


def _as_ring(coords: Any, op: str) -> np.ndarray:
    ring = np.asarray(coords, dtype=float)
    if ring.ndim != 2 or ring.shape[1] < 2:
        raise ConstructError(op, f"ring must be a sequence of 2-D points, got shape {ring.shape}")
    ring = ring[:, :2]
    if len(ring) < 4 or not np.array_equal(ring[0], ring[-1]):
        raise ConstructError(op, "ring must be closed (first vertex equal to last)")
    if len(np.unique(ring[:-1], axis=0)) < 3:
        raise ConstructError(op, "ring needs at least 3 distinct vertices")
    return ring


def ring_signed_area(ring: np.ndarray) -> float:
    ring = ring - ring[0]
    x, y = ring[:-1, 0], ring[:-1, 1]
    x1, y1 = ring[1:, 0], ring[1:, 1]
    return 0.5 * float(np.sum(x * y1 - x1 * y))


@dataclass(frozen=True)
class Region:
    """One partition cell.

    ``polygons`` holds ``[shell, *holes]`` ring lists with shells
    counter-clockwise and holes clockwise; ``geometry`` is the untouched
    GeoJSON geometry, kept for lossless export.
    """

    id: str
    polygons: tuple[tuple[np.ndarray, ...], ...]
    population: float | None = None
    geometry: dict | None = None

    @property
    def rings(self) -> list[np.ndarray]:
        return [ring for poly in self.polygons for ring in poly]

    def shape(self) -> Polygon | MultiPolygon:
        polys = [Polygon(poly[0], holes=list(poly[1:])) for poly in self.polygons]
        return polys[0] if len(polys) == 1 else MultiPolygon(polys)


def _oriented(polygon_rings: Sequence[Any], op: str) -> tuple[np.ndarray, ...]:
    out = []
    for k, coords in enumerate(polygon_rings):
        ring = _as_ring(coords, op)
        area = ring_signed_area(ring)
        want_ccw = k == 0
        if (area > 0) != want_ccw:
            ring = ring[::-1].copy()
        out.append(ring)
    return tuple(out)


@dataclass(frozen=True)
class Partition:
    regions: tuple[Region, ...]

    def __post_init__(self) -> None:
        ids = [r.id for r in self.regions]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ConstructError("Partition", f"duplicate region ids {dup[:10]}")
        for r in self.regions:
            if r.population is not None and r.population < 0:
                raise ConstructError("Partition", f"negative population for region {r.id!r}")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.regions)

    def __len__(self) -> int:
        return len(self.regions)

    @classmethod
    def from_polygons(
        cls,
        items: Sequence[tuple[str, Sequence[Sequence[Any]]]],
        populations: Sequence[float | None] | None = None,
    ) -> "Partition":
        """Build from ``(id, [shell, *holes])`` pairs, one polygon per region."""
        regions = []
        for k, (rid, rings) in enumerate(items):
            pop = None if populations is None else populations[k]
            regions.append(Region(str(rid), (_oriented(rings, "Partition"),), pop))
        return cls(tuple(regions))


def centroid(rings: Sequence[Any]) -> np.ndarray:
    """Area centroid of a set of closed rings (shoelace formula).

    Coordinates are taken relative to the first vertex. Ring orientation
    carries the sign: a hole wound opposite to its shell subtracts its area. If the total comes out negative (every ring
    clockwise) the orientation convention is flipped.
    """
    checked = [_as_ring(coords, "centroid") for coords in rings]
    if not checked:
        raise ConstructError("centroid", "no rings given")
    # shift to a local origin so small polygons far from (0, 0) keep precision
    origin = checked[0][0].copy()
    total = 0.0
    cx = cy = 0.0
    for ring in checked:
        ring = ring - origin
        x, y = ring[:-1, 0], ring[:-1, 1]
        x1, y1 = ring[1:, 0], ring[1:, 1]
        cross = x * y1 - x1 * y
        total += 0.5 * cross.sum()
        cx += float(np.sum((x + x1) * cross)) / 6.0
        cy += float(np.sum((y + y1) * cross)) / 6.0
    if total == 0.0:
        raise ConstructError("centroid", "degenerate polygon with zero area")
    return origin + np.array([cx / total, cy / total])


def _segments(region: Region) -> np.ndarray:
    segs = [np.stack([ring[:-1], ring[1:]], axis=1) for ring in region.rings]
    return np.concatenate(segs, axis=0)


def _share_segment(sa: np.ndarray, sb: np.ndarray, tol: float) -> bool:
    """Any pair of segments collinear within ``tol`` overlapping by more than ``tol``."""
    lo_b = sb.reshape(-1, 2).min(axis=0) - tol
    hi_b = sb.reshape(-1, 2).max(axis=0) + tol
    lo_a = sa.reshape(-1, 2).min(axis=0) - tol
    hi_a = sa.reshape(-1, 2).max(axis=0) + tol
    sa = sa[np.all(sa.max(axis=1) >= lo_b, axis=1) & np.all(sa.min(axis=1) <= hi_b, axis=1)]
    sb = sb[np.all(sb.max(axis=1) >= lo_a, axis=1) & np.all(sb.min(axis=1) <= hi_a, axis=1)]
    if len(sa) == 0 or len(sb) == 0:
        return False
    p0, p1 = sa[:, 0], sa[:, 1]
    vec = p1 - p0
    length = np.hypot(vec[:, 0], vec[:, 1])
    good = length > tol
    p0, vec, length = p0[good], vec[good], length[good]
    if len(p0) == 0:
        return False
    unit = vec / length[:, None]
    normal = np.stack([-unit[:, 1], unit[:, 0]], axis=1)
    # rows: segments of a, columns: segments of b
    rel0 = sb[None, :, 0, :] - p0[:, None, :]
    rel1 = sb[None, :, 1, :] - p0[:, None, :]
    off0 = np.abs(np.einsum("ijk,ik->ij", rel0, normal))
    off1 = np.abs(np.einsum("ijk,ik->ij", rel1, normal))
    t0 = np.einsum("ijk,ik->ij", rel0, unit)
    t1 = np.einsum("ijk,ik->ij", rel1, unit)
    overlap = np.minimum(length[:, None], np.maximum(t0, t1)) - np.maximum(0.0, np.minimum(t0, t1))
    return bool(np.any((off0 <= tol) & (off1 <= tol) & (overlap > tol)))


def region_adjacency_graph(
    p: Partition,
    contiguity: Contiguity = "queen",
    tol: float = 1e-9,
) -> Graph:
    """Undirected unit-weight graph of regions whose boundaries meet.

    Queen contiguity links regions whose outlines come within ``tol`` of
    each other (a shared corner suffices). Rook contiguity additionally
    needs a pair of boundary segments that are collinear within ``tol`` and
    overlap along more than ``tol``. Nodes sit at region centroids.
    """
    if len(p) < 1:
        raise ConstructError("region_adjacency_graph", "partition has no regions")
    if tol < 0:
        raise ConstructError("region_adjacency_graph", f"tol must be >= 0, got {tol}")
    if contiguity not in ("queen", "rook"):
        raise ConstructError("region_adjacency_graph", f"contiguity must be 'queen' or 'rook', got {contiguity!r}")
    shapes = [r.shape() for r in p.regions]
    boundaries = [s.boundary for s in shapes]
    tree = STRtree(boundaries)
    left, right = tree.query(boundaries, predicate="dwithin", distance=tol)
    rows, cols = [], []
    segs: dict[int, np.ndarray] = {}
    for i, j in zip(left.tolist(), right.tolist()):
        if i >= j:
            continue
        if contiguity == "rook":
            si = segs.setdefault(i, _segments(p.regions[i]))
            sj = segs.setdefault(j, _segments(p.regions[j]))
            if not _share_segment(si, sj, tol):
                continue
        rows += [i, j]
        cols += [j, i]
    n = len(p)
    a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    coords = np.array([centroid(r.rings) for r in p.regions])
    return Graph(directed=False, adjacency=a, labels=p.ids, coords=coords)


@dataclass(frozen=True)
class ODMatrix:
    """Square flow matrix ``M_ij`` (trips from ``ids[i]`` to ``ids[j]``)."""

    ids: tuple[str, ...]
    flows: sp.csr_matrix
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ids = tuple(str(x) for x in self.ids)
        if len(set(ids)) != len(ids):
            raise ConstructError("ODMatrix", "region ids must be unique")
        m = sp.csr_matrix(self.flows, dtype=float, copy=True)
        if m.shape != (len(ids), len(ids)):
            raise ConstructError("ODMatrix", f"flows shape {m.shape} does not match {len(ids)} ids")
        m.eliminate_zeros()
        m.sort_indices()
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "flows", m)
        object.__setattr__(self, "_index", {k: i for i, k in enumerate(ids)})

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, label: str) -> int:
        return self._index[str(label)]

    def total(self) -> float:
        return float(self.flows.sum())

    def triples(self):
        coo = self.flows.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            yield self.ids[coo.row[k]], self.ids[coo.col[k]], float(coo.data[k])

    @classmethod
    def from_dense(cls, ids: Sequence[str], flows: Any) -> "ODMatrix":
        return cls(tuple(ids), sp.csr_matrix(np.asarray(flows, dtype=float)))


def od_graph(m: ODMatrix, include_self_loops: bool = False) -> Graph:
    """Directed graph with an arc ``i -> j`` of weight ``M_ij`` for each nonzero flow."""
    f = m.flows
    if f.nnz and f.data.min() < 0:
        coo = f.tocoo()
        k = int(np.argmin(coo.data))
        raise ConstructError(
            "od_graph",
            f"negative flow {coo.data[k]} from {m.ids[coo.row[k]]!r} to {m.ids[coo.col[k]]!r}",
        )
    if not include_self_loops:
        f = f.tolil()
        f.setdiag(0)
        f = f.tocsr()
    return Graph(directed=True, adjacency=f, labels=m.ids)


def partition_from_geojson(doc: dict) -> Partition:
    if doc.get("type") != "FeatureCollection":
        raise ConstructError("read_partition_geojson", "expected a GeoJSON FeatureCollection")
    regions = []
    for k, feat in enumerate(doc.get("features", [])):
        props = feat.get("properties") or {}
        if props.get("id") is None:
            raise ConstructError("read_partition_geojson", f"feature {k} has no 'id' property")
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        if gtype == "Polygon":
            parts = [geom["coordinates"]]
        elif gtype == "MultiPolygon":
            parts = geom["coordinates"]
        else:
            raise ConstructError("read_partition_geojson", f"feature {props['id']!r}: unsupported geometry {gtype!r}")
        polygons = tuple(_oriented(part, "read_partition_geojson") for part in parts)
        pop = props.get("population")
        regions.append(Region(str(props["id"]), polygons, None if pop is None else float(pop), geom))
    return Partition(tuple(regions))


def read_partition_geojson(path: str | Path) -> Partition:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return partition_from_geojson(doc)


def _read_ids(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip() and not line.startswith("#")]


def read_od_csv(path: str | Path, ids_path: str | Path | None = None) -> ODMatrix:
    """Read ``origin,destination,flow`` triples.

    Region order is the optional id list first (which keeps regions that
    appear in no triple), then first appearance in the file.
    """
    order: dict[str, int] = {}
    if ids_path is not None:
        for rid in _read_ids(ids_path):
            order.setdefault(rid, len(order))
    rows, cols, vals = [], [], []
    seen: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"origin", "destination", "flow"} - set(reader.fieldnames or ())
        if missing:
            raise ConstructError("read_od_csv", f"{path}: missing columns {sorted(missing)}")
        for rec in reader:
            o, d = rec["origin"].strip(), rec["destination"].strip()
            if (o, d) in seen:
                raise ConstructError("read_od_csv", f"duplicate pair ({o!r}, {d!r})")
            seen.add((o, d))
            for rid in (o, d):
                order.setdefault(rid, len(order))
            rows.append(order[o])
            cols.append(order[d])
            vals.append(float(rec["flow"]))
    n = len(order)
    return ODMatrix(tuple(order), sp.csr_matrix((vals, (rows, cols)), shape=(n, n)))


def write_od_csv(m: ODMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["origin", "destination", "flow"])
        for o, d, f in m.triples():
            w.writerow([o, d, repr(f)])
