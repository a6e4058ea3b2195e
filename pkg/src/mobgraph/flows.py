"""Gravity-model trip generation, CPC scoring and Laplacian population estimation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .construct import ODMatrix
from .errors import FlowError
from .graph import Graph, components
from .laplacian import LaplacianKind, laplacian, laplacian_pseudoinverse

__all__ = [
    "GravitySpec",
    "FluxVector",
    "gravity_flows",
    "cpc",
    "estimate_population",
    "read_gravity_nodes",
    "read_distance_csv",
    "read_flux_csv",
]

Deterrence = Literal["power", "exponential"]


@dataclass(frozen=True)
class GravitySpec:
    """Inputs of the singly-constrained gravity model.

    Parameters
    ----------
    ids : tuple of str
    outflows : ndarray
        Total trips ``O_i`` leaving each location.
    masses : ndarray
        Attractiveness ``m_i`` (population), strictly positive.
    distances : ndarray
        ``(n, n)`` matrix ``r_ij``, positive off the diagonal.
    beta1 : float
        Mass exponent.
    deterrence : {"power", "exponential"}
        ``f(r) = r**-beta2`` or ``f(r) = exp(-beta2 * r)``.
    beta2 : float
        Deterrence exponent, ``>= 0``.
    """

    ids: tuple[str, ...]
    outflows: np.ndarray
    masses: np.ndarray
    distances: np.ndarray
    beta1: float = 1.0
    deterrence: Deterrence = "power"
    beta2: float = 2.0

    def __post_init__(self) -> None:
        n = len(self.ids)
        o = np.asarray(self.outflows, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        r = np.asarray(self.distances, dtype=float)
        if o.shape != (n,) or m.shape != (n,) or r.shape != (n, n):
            raise FlowError("GravitySpec", "outflows, masses and distances must match the number of ids")
        if np.any(o < 0):
            raise FlowError("GravitySpec", "outflows must be non-negative")
        if np.any(m <= 0):
            raise FlowError("GravitySpec", "masses must be strictly positive")
        off = ~np.eye(n, dtype=bool)
        if np.any(r[off] <= 0):
            raise FlowError("GravitySpec", "distances between distinct locations must be positive")
        if self.beta2 < 0:
            raise FlowError("GravitySpec", f"beta2 must be >= 0, got {self.beta2}")
        if self.deterrence not in ("power", "exponential"):
            raise FlowError("GravitySpec", f"unknown deterrence {self.deterrence!r}")
        object.__setattr__(self, "ids", tuple(str(x) for x in self.ids))
        object.__setattr__(self, "outflows", o)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "distances", r)

    @property
    def n(self) -> int:
        return len(self.ids)

    @classmethod
    def from_coordinates(
        cls,
        ids: Sequence[str],
        xy: np.ndarray,
        masses: Sequence[float],
        outflows: Sequence[float],
        **kwargs,
    ) -> "GravitySpec":
        xy = np.asarray(xy, dtype=float)
        diff = xy[:, None, :] - xy[None, :, :]
        return cls(tuple(ids), np.asarray(outflows), np.asarray(masses), np.hypot(diff[..., 0], diff[..., 1]), **kwargs)

    def log_deterrence(self, r: np.ndarray) -> np.ndarray:
        if self.deterrence == "power":
            return -self.beta2 * np.log(r)
        return -self.beta2 * r


def gravity_flows(
    spec: GravitySpec,
    destinations: Mapping[int, Sequence[int]] | Sequence[Sequence[int]] | None = None,
) -> ODMatrix:
    """Flows ``y_ij = O_i m_j^b1 f(r_ij) / sum_k m_k^b1 f(r_ik)``.

    The sum runs over the candidate destinations of origin ``i`` (all other
    locations by default), so every row sums to ``O_i``. Log weights are
    shifted by their maximum before exponentiating, which avoids underflow
    for steep deterrence.
    """
    n = spec.n
    log_mass = spec.beta1 * np.log(spec.masses)
    rows, cols, vals = [], [], []
    for i in range(n):
        if destinations is None:
            cand = np.delete(np.arange(n), i)
        else:
            try:
                cand = np.asarray(destinations[i], dtype=np.int64)
            except (KeyError, IndexError):
                cand = np.zeros(0, dtype=np.int64)
        label = spec.ids[i]
        if cand.size == 0:
            raise FlowError("gravity_flows", f"origin {label!r} has no candidate destinations")
        if np.any(cand == i) and spec.distances[i, i] <= 0:
            raise FlowError("gravity_flows", f"origin {label!r} lists itself with zero self-distance")
        logw = log_mass[cand] + spec.log_deterrence(spec.distances[i, cand])
        top = logw.max()
        if not np.isfinite(top):
            raise FlowError("gravity_flows", f"zero or non-finite denominator for origin {label!r}")
        w = np.exp(logw - top)
        y = spec.outflows[i] * (w / w.sum())
        rows.extend([i] * cand.size)
        cols.extend(cand.tolist())
        vals.extend(y.tolist())
    flows = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return ODMatrix(spec.ids, flows)


def _flows(x: ODMatrix | np.ndarray | sp.spmatrix) -> sp.csr_matrix:
    if isinstance(x, ODMatrix):
        return x.flows
    return sp.csr_matrix(np.asarray(x, dtype=float) if not sp.issparse(x) else x, dtype=float)


def cpc(y: ODMatrix | np.ndarray, z: ODMatrix | np.ndarray) -> float:
    """Common Part of Commuters ``2 sum min(y, z) / (sum y + sum z)``."""
    if isinstance(y, ODMatrix) and isinstance(z, ODMatrix) and y.ids != z.ids:
        if set(y.ids) != set(z.ids):
            raise FlowError("cpc", "predicted and observed matrices cover different ids")
        perm = [z.index(k) for k in y.ids]
        z = ODMatrix(y.ids, z.flows[perm][:, perm])
    fy, fz = _flows(y), _flows(z)
    if fy.shape != fz.shape:
        raise FlowError("cpc", f"shape mismatch {fy.shape} vs {fz.shape}")
    if (fy.nnz and fy.data.min() < 0) or (fz.nnz and fz.data.min() < 0):
        raise FlowError("cpc", "flows must be non-negative")
    total = float(fy.sum()) + float(fz.sum())
    if total == 0:
        raise FlowError("cpc", "both matrices are all zero")
    common = float(fy.minimum(fz).sum())
    return 2.0 * common / total


@dataclass(frozen=True)
class FluxVector:
    """Net flux per node (positive = net outflow) and diffusivity ``k``."""

    q: np.ndarray
    k: float = 1.0

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise FlowError("FluxVector", f"diffusivity k must be positive, got {self.k}")
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))


def estimate_population(g: Graph, flux: FluxVector) -> np.ndarray:
    """Invert ``q = -k L phi`` with the Laplacian pseudoinverse.

    The result is only defined up to an additive constant; the returned
    field has zero mean.
    """
    if g.directed:
        raise FlowError("estimate_population", "graph must be undirected")
    if flux.q.shape != (g.n,):
        raise FlowError("estimate_population", f"flux has {flux.q.size} entries, graph has {g.n} nodes")
    if g.n == 0:
        return np.zeros(0)
    count = components(g, "weak").count
    if count != 1:
        raise FlowError(
            "estimate_population",
            f"graph is disconnected ({count} components); restrict to the largest component first",
        )
    lp = laplacian_pseudoinverse(laplacian(g, LaplacianKind.COMBINATORIAL))
    return -(lp @ flux.q) / flux.k


def read_gravity_nodes(path: str | Path) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray]:
    """Read ``id,x,y,mass,outflow`` rows; returns ids, xy, masses, outflows."""
    ids, xy, mass, out = [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"id", "x", "y", "mass", "outflow"}
        missing = need - set(reader.fieldnames or ())
        if missing:
            raise FlowError("read_gravity_nodes", f"{path}: missing columns {sorted(missing)}")
        for rec in reader:
            ids.append(rec["id"].strip())
            xy.append((float(rec["x"]), float(rec["y"])))
            mass.append(float(rec["mass"]))
            out.append(float(rec["outflow"]))
    return ids, np.array(xy).reshape(-1, 2), np.array(mass), np.array(out)


def read_distance_csv(path: str | Path, ids: Sequence[str]) -> np.ndarray:
    """Dense distance matrix from ``origin,destination,distance`` rows.

    Pairs not listed stay ``inf`` (zero deterrence under both forms).
    """
    index = {k: i for i, k in enumerate(ids)}
    r = np.full((len(ids), len(ids)), np.inf)
    np.fill_diagonal(r, 0.0)
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            try:
                i, j = index[rec["origin"].strip()], index[rec["destination"].strip()]
            except KeyError as exc:
                raise FlowError("read_distance_csv", f"unknown id {exc.args[0]!r}") from None
            r[i, j] = float(rec["distance"])
    return r


def read_flux_csv(path: str | Path, labels: Sequence[str]) -> np.ndarray:
    index = {k: i for i, k in enumerate(labels)}
    q = np.zeros(len(labels))
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            key = rec["id"].strip()
            if key not in index:
                raise FlowError("read_flux_csv", f"flux for unknown node {key!r}")
            seen.add(key)
            q[index[key]] = float(rec["flux"])
    missing = [k for k in labels if k not in seen]
    if missing:
        raise FlowError("read_flux_csv", f"no flux given for nodes {missing[:10]}")
    return q
