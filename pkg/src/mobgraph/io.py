"""Plain-text exchange formats: edge lists, node tables, MatrixMarket and
metric-joined GeoJSON.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .centrality import MetricTable
from .construct import Partition
from .errors import GraphError, MobGraphError
from .graph import Graph, build_graph

__all__ = [
    "read_edge_list",
    "write_edge_list",
    "read_nodes_csv",
    "write_nodes_csv",
    "write_matrix_market",
    "export_metric_geojson",
    "ExportError",
]

log = logging.getLogger(__name__)

_DIRECTED_HINT = re.compile(r"directed\s*=\s*(true|false)", re.IGNORECASE)


class ExportError(MobGraphError):
    module = "cli"


def read_edge_list(
    path: str | Path,
    directed: bool | None = None,
    nodes_path: str | Path | None = None,
) -> Graph:
    """Read ``source,target,weight`` lines; ``#`` starts a comment.

    A header line ``source,target,weight`` is skipped. When ``directed`` is
    ``None`` a ``# ... directed=true`` comment decides, defaulting to
    undirected. ``nodes_path`` (``id,x,y``) fixes node order, keeps isolated
    nodes and attaches coordinates.
    """
    hint = None
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _DIRECTED_HINT.search(line)
                if m:
                    hint = m.group(1).lower() == "true"
                continue
            parts = [p.strip() for p in line.split(",")]
            if parts[:3] == ["source", "target", "weight"]:
                continue
            if len(parts) != 3:
                raise GraphError("read_edge_list", f"{path}:{lineno}: expected source,target,weight")
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphError("read_edge_list", f"{path}:{lineno}: bad weight {parts[2]!r}") from None
            edges.append((parts[0], parts[1], w))
    if directed is None:
        directed = bool(hint)
    nodes = coords = None
    if nodes_path is not None:
        nodes, coords = read_nodes_csv(nodes_path)
    return build_graph(edges, directed=directed, coords=coords, nodes=nodes)


def write_edge_list(g: Graph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# directed={'true' if g.directed else 'false'}\n")
        for u, v, w in g.edges():
            fh.write(f"{u},{v},{w!r}\n")


def read_nodes_csv(path: str | Path) -> tuple[list[str], dict[str, tuple[float, float]] | None]:
    ids: list[str] = []
    coords: dict[str, tuple[float, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = set(reader.fieldnames or ())
        if "id" not in fields:
            raise GraphError("read_nodes_csv", f"{path}: missing 'id' column")
        has_xy = {"x", "y"} <= fields
        for rec in reader:
            key = rec["id"].strip()
            ids.append(key)
            if has_xy:
                coords[key] = (float(rec["x"]), float(rec["y"]))
    return ids, (coords if coords else None)


def write_nodes_csv(g: Graph, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if g.coords is None:
            w.writerow(["id"])
            w.writerows([lab] for lab in g.labels)
        else:
            w.writerow(["id", "x", "y"])
            for lab, (x, y) in zip(g.labels, g.coords):
                w.writerow([lab, repr(float(x)), repr(float(y))])


def write_matrix_market(m: sp.spmatrix | np.ndarray, path: str | Path, comment: str | None = None) -> None:
    """Coordinate ``real general`` MatrixMarket file, 1-based, row-major order."""
    coo = sp.coo_matrix(m)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for k in order:
            fh.write(f"{coo.row[k] + 1} {coo.col[k] + 1} {float(coo.data[k])!r}\n")


def _column_values(table: MetricTable) -> dict[str, list]:
    out: dict[str, list] = {}
    for name, col in table.columns.items():
        out[name] = [None if np.isnan(x) else float(x) for x in col]
        if name in table.normalized:
            out[f"{name}_norm"] = [float(x) for x in table.normalized[name]]
        if name in table.quartiles:
            out[f"{name}_q"] = [int(x) for x in table.quartiles[name]]
    return out


def export_metric_geojson(
    p: Partition,
    table: MetricTable,
    path: str | Path,
) -> list[str]:
    """Join metric columns onto partition features and write GeoJSON.

    Every region becomes a feature carrying its original geometry, its
    ``id`` and one property per metric column. Regions absent from the
    table (pruned nodes, say) get ``null`` values and are reported in the
    log and in the returned list.
    """
    ids = set(p.ids)
    unknown = [lab for lab in table.labels if lab not in ids]
    if unknown:
        raise ExportError("export_metric_geojson", f"labels not in partition: {unknown[:10]}")
    columns = _column_values(table)
    row = {lab: i for i, lab in enumerate(table.labels)}
    missing = [rid for rid in p.ids if rid not in row]
    if missing:
        log.warning("%d regions have no metric values (e.g. %s); exported as null", len(missing), missing[:5])
    features = []
    for region in p.regions:
        props: dict = {"id": region.id}
        if region.population is not None:
            props["population"] = region.population
        i = row.get(region.id)
        for name, vals in columns.items():
            props[name] = None if i is None else vals[i]
        geometry = region.geometry
        if geometry is None:
            coords = [[r.tolist() for r in poly] for poly in region.polygons]
            geometry = (
                {"type": "Polygon", "coordinates": coords[0]}
                if len(coords) == 1
                else {"type": "MultiPolygon", "coordinates": coords}
            )
        features.append({"type": "Feature", "properties": props, "geometry": geometry})
    doc = {"type": "FeatureCollection", "features": features}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")
    return missing
