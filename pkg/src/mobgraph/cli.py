"""``mobgraph`` command line.

Each subcommand reads only the paths it is given and writes plot-ready
CSV / GeoJSON / MatrixMarket files into ``--out-dir``. Library
rejections are reported as ``module.operation: cause`` with exit status 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import centrality, construct, flows, graph, io, spectral
from .centrality import MetricTable
from .errors import CentralityError, MobGraphError
from .graph import Graph
from .laplacian import LaplacianKind, laplacian, spectrum_report

log = logging.getLogger("mobgraph")

COMMANDS = ("build-ra", "build-od", "metrics", "spectral", "laplacian", "gravity", "cpc", "fick", "export")
DIRECTED_METRICS = ("degree", "closeness", "harmonic", "betweenness", "pagerank")
UNDIRECTED_METRICS = ("degree", "closeness", "harmonic", "betweenness")


class ConfigError(MobGraphError):
    module = "cli"


@dataclass
class RunConfig:
    command: str
    inputs: dict[str, Path | None] = field(default_factory=dict)
    out_dir: Path = Path(".")
    directed: bool | None = None
    contiguity: str = "queen"
    snap_tol: float = 1e-9
    include_self_loops: bool = False
    largest_scc: bool = False
    prune_degree: int | None = None
    iterate: bool = False
    invert_weights: bool = False
    metrics: tuple[str, ...] = ()
    kinds: tuple[str, ...] = ("combinatorial",)
    normalize: str | None = None
    quartiles: bool = False
    damping: float = 0.85
    tol: float = 1e-12
    deterrence: str = "power"
    beta1: float = 1.0
    beta2: float = 2.0
    k: float = 1.0
    write_matrix: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError("run", f"unknown command {self.command!r}")
        for name, path in self.inputs.items():
            if path is not None and not Path(path).is_file():
                raise ConfigError("run", f"input {name} not found: {path}")
        self.out_dir.mkdir(parents=True, exist_ok=True)
        if not os.access(self.out_dir, os.W_OK):
            raise ConfigError("run", f"output directory not writable: {self.out_dir}")


# -- graph loading -----------------------------------------------------------


def _load_graph(cfg: RunConfig) -> tuple[Graph, construct.Partition | None]:
    src = cfg.inputs
    partition = None
    if src.get("partition"):
        partition = construct.read_partition_geojson(src["partition"])
        g = construct.region_adjacency_graph(partition, cfg.contiguity, cfg.snap_tol)
    elif src.get("od"):
        m = construct.read_od_csv(src["od"], src.get("ids"))
        g = construct.od_graph(m, cfg.include_self_loops)
    elif src.get("edges"):
        g = io.read_edge_list(src["edges"], cfg.directed, src.get("nodes"))
    else:
        raise ConfigError("run", f"{cfg.command} needs --edges, --partition or --od")
    return _preprocess(g, cfg), partition


def _preprocess(g: Graph, cfg: RunConfig) -> Graph:
    if cfg.prune_degree is not None:
        g = graph.prune_low_degree(g, cfg.prune_degree, cfg.iterate)
        if g.is_empty:
            raise ConfigError("run", "pruning removed every node")
    if cfg.largest_scc:
        mode = "strong" if g.directed else "weak"
        before = g.n
        g, _ = graph.largest_component_subgraph(g, mode)
        log.info("kept largest %s component: %d of %d nodes", mode, g.n, before)
    if cfg.invert_weights:
        g = graph.reciprocal_weights(g)
    return g


def _add(table: MetricTable, name: str, values: np.ndarray, cfg: RunConfig) -> None:
    table.add(name, values)
    if cfg.normalize:
        try:
            table.normalized[name] = centrality.normalize(values, cfg.normalize)
        except CentralityError as exc:
            log.warning("%s: no normalized column (%s)", name, exc.cause)
    if cfg.quartiles:
        try:
            table.quartiles[name] = centrality.quartile_bins(values)
        except CentralityError as exc:
            log.warning("%s: no quartile column (%s)", name, exc.cause)


# -- commands ----------------------------------------------------------------


def _cmd_build(cfg: RunConfig) -> None:
    g, _ = _load_graph(cfg)
    io.write_edge_list(g, cfg.out_dir / "edges.csv")
    io.write_nodes_csv(g, cfg.out_dir / "nodes.csv")
    io.write_matrix_market(g.adjacency, cfg.out_dir / "sparsity.mtx")
    print(json.dumps({"nodes": g.n, "edges": g.n_edges, "directed": g.directed}))


def _cmd_metrics(cfg: RunConfig) -> None:
    g, _ = _load_graph(cfg)
    wanted = cfg.metrics or (DIRECTED_METRICS if g.directed else UNDIRECTED_METRICS)
    table = MetricTable(g.labels)
    for metric in wanted:
        if metric in ("degree", "closeness", "harmonic"):
            fn = {"degree": graph.degrees, "closeness": centrality.closeness, "harmonic": centrality.harmonic}[metric]
            if g.directed:
                _add(table, f"{metric}_out", fn(g, "out"), cfg)
                _add(table, f"{metric}_in", fn(g, "in"), cfg)
            else:
                _add(table, metric, fn(g, "out"), cfg)
        elif metric == "betweenness":
            _add(table, metric, centrality.betweenness(g), cfg)
        elif metric == "pagerank":
            _add(table, metric, centrality.pagerank(g, damping=cfg.damping, tol=cfg.tol), cfg)
        else:
            raise ConfigError("metrics", f"unknown metric {metric!r}")
    table.to_csv(cfg.out_dir / "metrics.csv")


def _cmd_spectral(cfg: RunConfig) -> None:
    g, _ = _load_graph(cfg)
    phi = spectral.perron_vector(g, tol=cfg.tol)
    field_ = spectral.circulation(g, phi)
    table = MetricTable(g.labels)
    _add(table, "perron", phi.phi, cfg)
    _add(table, "avg_circulation", spectral.average_node_circulation(g, field_), cfg)
    table.to_csv(cfg.out_dir / "perron.csv")
    field_.to_csv(g, cfg.out_dir / "circulation.csv")
    print(json.dumps({"nodes": g.n, "residual": phi.residual, "iterations": phi.iterations,
                      "invertible": field_.is_invertible()}))


def _cmd_laplacian(cfg: RunConfig) -> None:
    g, _ = _load_graph(cfg)
    reports = []
    for raw in cfg.kinds:
        kind = LaplacianKind.parse(raw)
        # computed here so a non-strongly-connected graph reports its component count
        phi = spectral.perron_vector(g, tol=cfg.tol) if kind.needs_perron else None
        rep = spectrum_report(g, kind, phi)
        rep.to_csv(cfg.out_dir / f"spectrum_{kind.value}.csv")
        if cfg.write_matrix:
            io.write_matrix_market(laplacian(g, kind, phi), cfg.out_dir / f"laplacian_{kind.value}.mtx")
        reports.append(rep.summary())
    with open(cfg.out_dir / "spectrum_report.json", "w", encoding="utf-8") as fh:
        json.dump(reports, fh, indent=2)
        fh.write("\n")
    print(json.dumps(reports))


def _cmd_gravity(cfg: RunConfig) -> None:
    ids, xy, mass, out = flows.read_gravity_nodes(cfg.inputs["gravity_nodes"])
    kwargs = dict(beta1=cfg.beta1, deterrence=cfg.deterrence, beta2=cfg.beta2)
    if cfg.inputs.get("distances"):
        r = flows.read_distance_csv(cfg.inputs["distances"], ids)
        spec = flows.GravitySpec(tuple(ids), out, mass, r, **kwargs)
    else:
        spec = flows.GravitySpec.from_coordinates(ids, xy, mass, out, **kwargs)
    dests = None
    if cfg.inputs.get("candidates"):
        dests = _read_candidates(cfg.inputs["candidates"], ids)
    construct.write_od_csv(flows.gravity_flows(spec, dests), cfg.out_dir / "gravity_od.csv")


def _read_candidates(path: Path, ids: Sequence[str]) -> dict[int, list[int]]:
    index = {k: i for i, k in enumerate(ids)}
    dests: dict[int, list[int]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            o, d = rec["origin"].strip(), rec["destination"].strip()
            if o not in index or d not in index:
                raise ConfigError("gravity", f"candidate pair ({o!r}, {d!r}) uses an unknown id")
            dests.setdefault(index[o], []).append(index[d])
    return dests


def _cmd_cpc(cfg: RunConfig) -> None:
    y = construct.read_od_csv(cfg.inputs["predicted"])
    z = construct.read_od_csv(cfg.inputs["observed"])
    ids = tuple(dict.fromkeys(y.ids + z.ids))
    y = _reindex(y, ids)
    z = _reindex(z, ids)
    value = flows.cpc(y, z)
    with open(cfg.out_dir / "cpc.json", "w", encoding="utf-8") as fh:
        json.dump({"cpc": value}, fh)
        fh.write("\n")
    print(json.dumps({"cpc": value}))


def _reindex(m: construct.ODMatrix, ids: tuple[str, ...]) -> construct.ODMatrix:
    pos = {k: i for i, k in enumerate(ids)}
    coo = m.flows.tocoo()
    rows = [pos[m.ids[i]] for i in coo.row]
    cols = [pos[m.ids[j]] for j in coo.col]
    return construct.ODMatrix(ids, sp.csr_matrix((coo.data, (rows, cols)), shape=(len(ids), len(ids))))


def _cmd_fick(cfg: RunConfig) -> None:
    g, _ = _load_graph(cfg)
    q = flows.read_flux_csv(cfg.inputs["flux"], g.labels)
    est = flows.estimate_population(g, flows.FluxVector(q, cfg.k))
    table = MetricTable(g.labels)
    table.add("population", est)
    table.to_csv(cfg.out_dir / "population.csv")


def _cmd_export(cfg: RunConfig) -> None:
    p = construct.read_partition_geojson(cfg.inputs["partition"])
    table = MetricTable.read_csv(cfg.inputs["table"])
    missing = io.export_metric_geojson(p, table, cfg.out_dir / "metrics.geojson")
    if missing:
        print(f"warning: {len(missing)} regions without metric values", file=sys.stderr)


_HANDLERS = {
    "build-ra": _cmd_build,
    "build-od": _cmd_build,
    "metrics": _cmd_metrics,
    "spectral": _cmd_spectral,
    "laplacian": _cmd_laplacian,
    "gravity": _cmd_gravity,
    "cpc": _cmd_cpc,
    "fick": _cmd_fick,
    "export": _cmd_export,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; 0 on success, 2 on any rejected input."""
    try:
        cfg.validate()
        _HANDLERS[cfg.command](cfg)
    except MobGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: cli.{cfg.command}: {exc}", file=sys.stderr)
        return 2
    return 0


# -- argument parsing --------------------------------------------------------


def _graph_args(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("graph input (one of)")
    src.add_argument("--edges", type=Path, help="edge list source,target,weight")
    src.add_argument("--nodes", type=Path, help="node table id[,x,y] for --edges")
    src.add_argument("--partition", type=Path, help="GeoJSON partition (Region Adjacency graph)")
    src.add_argument("--od", type=Path, help="OD CSV origin,destination,flow")
    src.add_argument("--ids", type=Path, help="id list keeping isolated OD regions")
    d = p.add_mutually_exclusive_group()
    d.add_argument("--directed", dest="directed", action="store_true", default=None)
    d.add_argument("--undirected", dest="directed", action="store_false")
    p.add_argument("--contiguity", choices=("queen", "rook"), default="queen")
    p.add_argument("--snap-tol", type=float, default=1e-9)
    p.add_argument("--include-self-loops", action="store_true")
    p.add_argument("--largest-scc", action="store_true", help="keep the largest (strong) component")
    p.add_argument("--prune-degree", type=int, metavar="K")
    p.add_argument("--iterate", action="store_true", help="repeat pruning to a fixpoint")
    p.add_argument("--invert-weights", action="store_true", help="use 1/weight as travel cost")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mobgraph", description="Mobility graph analysis")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_: str, with_graph: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("-o", "--out-dir", type=Path, default=Path("."))
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--normalize", choices=("max", "minmax"))
        p.add_argument("--quartiles", action="store_true")
        if with_graph:
            _graph_args(p)
        return p

    command("build-ra", "Region Adjacency graph from a GeoJSON partition")
    command("build-od", "Origin-Destination digraph from an OD CSV")
    p = command("metrics", "node centrality table")
    p.add_argument("--metrics", help="comma list of " + ",".join(DIRECTED_METRICS))
    p.add_argument("--damping", type=float, default=0.85)
    command("spectral", "Perron vector and circulation")
    p = command("laplacian", "Laplacian spectra")
    p.add_argument("--kind", action="append", help="laplacian kind (repeatable)")
    p.add_argument("--matrix", action="store_true", help="also write the matrix as MatrixMarket")
    p = command("gravity", "singly-constrained gravity flows", with_graph=False)
    p.add_argument("--gravity-nodes", type=Path, required=True, help="CSV id,x,y,mass,outflow")
    p.add_argument("--distances", type=Path, help="CSV origin,destination,distance")
    p.add_argument("--candidates", type=Path, help="CSV origin,destination of allowed pairs")
    p.add_argument("--deterrence", choices=("power", "exp"), default="power")
    p.add_argument("--beta1", type=float, default=1.0)
    p.add_argument("--beta2", type=float, default=2.0)
    p = command("cpc", "Common Part of Commuters", with_graph=False)
    p.add_argument("--predicted", type=Path, required=True)
    p.add_argument("--observed", type=Path, required=True)
    p = command("fick", "population estimate from net fluxes")
    p.add_argument("--flux", type=Path, required=True, help="CSV id,flux")
    p.add_argument("--k", type=float, default=1.0, help="diffusivity")
    p = command("export", "join a metric table onto a partition", with_graph=False)
    p.add_argument("--partition", type=Path, required=True)
    p.add_argument("--table", type=Path, required=True)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    get = lambda name, default=None: getattr(ns, name, default)  # noqa: E731
    inputs = {
        name: get(name)
        for name in ("edges", "nodes", "partition", "od", "ids", "gravity_nodes", "distances",
                     "candidates", "predicted", "observed", "flux", "table")
        if get(name) is not None
    }
    metrics = tuple(m.strip() for m in get("metrics").split(",")) if get("metrics") else ()
    deterrence = {"exp": "exponential"}.get(get("deterrence", "power"), get("deterrence", "power"))
    return RunConfig(
        command=ns.command,
        inputs=inputs,
        out_dir=ns.out_dir,
        directed=get("directed"),
        contiguity=get("contiguity", "queen"),
        snap_tol=get("snap_tol", 1e-9),
        include_self_loops=get("include_self_loops", False),
        largest_scc=get("largest_scc", False),
        prune_degree=get("prune_degree"),
        iterate=get("iterate", False),
        invert_weights=get("invert_weights", False),
        metrics=metrics,
        kinds=tuple(get("kind") or ("combinatorial",)),
        normalize=get("normalize"),
        quartiles=get("quartiles", False),
        damping=get("damping", 0.85),
        tol=ns.tol,
        deterrence=deterrence,
        beta1=get("beta1", 1.0),
        beta2=get("beta2", 2.0),
        k=get("k", 1.0),
        write_matrix=get("matrix", False),
    )


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if ns.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
