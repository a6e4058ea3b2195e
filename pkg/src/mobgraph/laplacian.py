"""Graph Laplacians for undirected and directed graphs, and their spectra.

All matrices are dense ``numpy`` arrays: full spectra are wanted, and the
graphs of interest (a few thousand nodes) fit comfortably.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LaplacianError, NotStronglyConnectedError, SpectralError
from .graph import Graph, components, degrees
from .spectral import PerronVector, perron_vector

__all__ = [
    "LaplacianKind",
    "SpectrumReport",
    "laplacian",
    "symmetry_defect",
    "symmetric_eigenvalues",
    "spectrum_report",
    "laplacian_pseudoinverse",
    "undirected_coincidence",
    "PSD_ATOL",
]

PSD_ATOL = 1e-10
SYMMETRY_ATOL = 1e-10


class LaplacianKind(str, enum.Enum):
    COMBINATORIAL = "combinatorial"
    NORMALIZED = "normalized"
    COMBINATORIAL_DIRECTED = "combinatorial-directed"
    SYMMETRIZED = "symmetrized"
    COMBINATORIAL_SYMMETRIZED = "combinatorial-symmetrized"
    DIPLACIAN = "diplacian"

    @property
    def needs_perron(self) -> bool:
        return self in _PERRON_KINDS

    @property
    def always_symmetric(self) -> bool:
        return self in (
            LaplacianKind.COMBINATORIAL_DIRECTED,
            LaplacianKind.SYMMETRIZED,
            LaplacianKind.COMBINATORIAL_SYMMETRIZED,
        )

    @classmethod
    def parse(cls, value: "str | LaplacianKind") -> "LaplacianKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-").replace(" ", "-")
        aliases = {"normalised": "normalized", "symmetrised": "symmetrized",
                   "combinatorial-symmetrised": "combinatorial-symmetrized"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise LaplacianError("laplacian", f"unknown kind {value!r} (choose from {choices})") from None


_PERRON_KINDS = (
    LaplacianKind.SYMMETRIZED,
    LaplacianKind.COMBINATORIAL_SYMMETRIZED,
    LaplacianKind.DIPLACIAN,
)


@dataclass(frozen=True)
class SpectrumReport:
    """Spectrum of one Laplacian with its symmetry and PSD verdicts.

    ``eigenvalues`` are ascending reals when the matrix is symmetric and
    complex values sorted by (real, imag) otherwise. ``is_psd`` is ``None``
    where the verdict does not apply (non-symmetric matrices).
    """

    kind: LaplacianKind
    eigenvalues: np.ndarray
    is_symmetric: bool
    symmetry_defect: float
    is_psd: bool | None
    min_eigenvalue: float | None
    spectral_radius: float

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if np.iscomplexobj(self.eigenvalues):
                w.writerow(["index", "eigenvalue", "imag"])
                for i, lam in enumerate(self.eigenvalues):
                    w.writerow([i, repr(float(lam.real)), repr(float(lam.imag))])
            else:
                w.writerow(["index", "eigenvalue"])
                for i, lam in enumerate(self.eigenvalues):
                    w.writerow([i, repr(float(lam))])

    def summary(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": int(len(self.eigenvalues)),
            "is_symmetric": self.is_symmetric,
            "symmetry_defect": self.symmetry_defect,
            "is_psd": self.is_psd,
            "min_eigenvalue": self.min_eigenvalue,
            "spectral_radius": self.spectral_radius,
        }


def _perron(g: Graph, kind: LaplacianKind, phi: PerronVector | np.ndarray | None) -> np.ndarray:
    if phi is not None:
        v = phi.phi if isinstance(phi, PerronVector) else np.asarray(phi, dtype=float)
        if v.shape != (g.n,) or np.any(v <= 0):
            raise LaplacianError("laplacian", f"{kind.value}: Perron vector must be positive with length {g.n}")
        return v
    try:
        return perron_vector(g).phi
    except NotStronglyConnectedError as exc:
        raise LaplacianError(
            "laplacian",
            f"{kind.value} requires a strongly connected graph ({exc.n_components} strong components)",
        ) from exc
    except SpectralError as exc:
        raise LaplacianError("laplacian", f"{kind.value}: {exc.cause}") from exc


def laplacian(
    g: Graph,
    kind: LaplacianKind | str = LaplacianKind.COMBINATORIAL,
    phi: PerronVector | np.ndarray | None = None,
) -> np.ndarray:
    """Dense Laplacian of the requested kind.

    ============================  ===========================================
    combinatorial                 ``D - A``
    normalized                    ``I - D^{-1/2} A D^{-1/2}``
    combinatorial-directed        ``(D_out + D_in - A - A^T) / 2``
    symmetrized                   ``I - (S P S^{-1} + S^{-1} P^T S) / 2``
    combinatorial-symmetrized     ``Phi - (Phi P + P^T Phi) / 2``
    diplacian                     ``S (I - P) S^{-1}``
    ============================  ===========================================

    ``D`` is the out-degree matrix, ``P = D^{-1} A``, ``Phi = diag(phi)``
    for the Perron vector ``phi`` and ``S = Phi^{1/2}``. The last three
    kinds need a strongly connected graph; ``phi`` is computed unless given.
    """
    kind = LaplacianKind.parse(kind)
    n = g.n
    a = g.dense()
    d_out = degrees(g, "out")
    if kind is LaplacianKind.COMBINATORIAL:
        return np.diag(d_out) - a
    if kind is LaplacianKind.COMBINATORIAL_DIRECTED:
        d_in = degrees(g, "in")
        return 0.5 * (np.diag(d_out + d_in) - (a + a.T))
    if np.any(d_out <= 0):
        bad = [g.labels[i] for i in np.flatnonzero(d_out <= 0)[:10]]
        raise LaplacianError("laplacian", f"{kind.value} requires positive degrees; zero at {bad}")
    if kind is LaplacianKind.NORMALIZED:
        s = 1.0 / np.sqrt(d_out)
        return np.eye(n) - s[:, None] * a * s[None, :]

    if kind.needs_perron and n > 0 and components(g, "strong").count != 1:
        count = components(g, "strong").count
        raise LaplacianError("laplacian", f"{kind.value} requires a strongly connected graph ({count} strong components)")
    v = _perron(g, kind, phi)
    p = a / d_out[:, None]
    root = np.sqrt(v)
    if kind is LaplacianKind.SYMMETRIZED:
        x = root[:, None] * p / root[None, :]
        return np.eye(n) - 0.5 * (x + x.T)
    if kind is LaplacianKind.COMBINATORIAL_SYMMETRIZED:
        x = v[:, None] * p
        return np.diag(v) - 0.5 * (x + x.T)
    # diplacian
    return np.eye(n) - root[:, None] * p / root[None, :]


def symmetry_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.abs(m - m.T).max()) if m.size else 0.0


def symmetric_eigenvalues(m: np.ndarray, atol: float = SYMMETRY_ATOL) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix (LAPACK ``syevd``)."""
    m = np.asarray(m, dtype=float)
    defect = symmetry_defect(m)
    if defect > atol:
        raise LaplacianError("symmetric_eigenvalues", f"matrix is not symmetric (defect {defect:.3e})")
    return np.linalg.eigvalsh(0.5 * (m + m.T))


def spectrum_report(
    g: Graph,
    kind: LaplacianKind | str,
    phi: PerronVector | np.ndarray | None = None,
) -> SpectrumReport:
    kind = LaplacianKind.parse(kind)
    m = laplacian(g, kind, phi)
    defect = symmetry_defect(m)
    symmetric = defect <= SYMMETRY_ATOL
    if symmetric and kind is not LaplacianKind.DIPLACIAN:
        vals = symmetric_eigenvalues(m)
        lo = float(vals[0]) if len(vals) else None
        return SpectrumReport(
            kind=kind,
            eigenvalues=vals,
            is_symmetric=True,
            symmetry_defect=defect,
            is_psd=None if lo is None else lo >= -PSD_ATOL,
            min_eigenvalue=lo,
            spectral_radius=float(np.abs(vals).max(initial=0.0)),
        )
    vals = np.linalg.eigvals(m)
    if symmetric:
        vals = np.sort(vals.real)  # a symmetric Diplacian has a real spectrum
    else:
        vals = vals[np.lexsort((vals.imag, vals.real))]
    return SpectrumReport(
        kind=kind,
        eigenvalues=vals,
        is_symmetric=symmetric,
        symmetry_defect=defect,
        is_psd=None,
        min_eigenvalue=None,
        spectral_radius=float(np.abs(vals).max(initial=0.0)),
    )


def laplacian_pseudoinverse(m: np.ndarray, rcond: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Eigenvalues below ``rcond * max_eigenvalue`` are treated as zero.
    """
    m = np.asarray(m, dtype=float)
    defect = symmetry_defect(m)
    if defect > SYMMETRY_ATOL:
        raise LaplacianError("laplacian_pseudoinverse", f"matrix is not symmetric (defect {defect:.3e})")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    if len(vals) and vals[0] < -PSD_ATOL * max(1.0, abs(vals[-1])):
        raise LaplacianError("laplacian_pseudoinverse", f"matrix is not PSD (min eigenvalue {vals[0]:.3e})")
    top = vals.max(initial=0.0)
    keep = vals > rcond * top if top > 0 else np.zeros_like(vals, dtype=bool)
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    return (vecs * inv) @ vecs.T


def undirected_coincidence(g: Graph) -> dict[str, float]:
    """Compare ``Phi - (Phi P + P^T Phi)/2`` with ``D - A`` on an undirected graph.

    With ``phi = d / sum(d)`` the two differ exactly by the factor
    ``sum(d)``, so both the raw and the degree-rescaled discrepancies are
    returned rather than choosing a normalization.
    """
    if g.directed:
        raise LaplacianError("undirected_coincidence", "graph must be undirected")
    comb = laplacian(g, LaplacianKind.COMBINATORIAL)
    sym = laplacian(g, LaplacianKind.COMBINATORIAL_SYMMETRIZED)
    volume = float(degrees(g, "out").sum())
    return {
        "raw_max_abs_diff": float(np.abs(sym - comb).max()),
        "volume": volume,
        "rescaled_max_abs_diff": float(np.abs(volume * sym - comb).max()),
    }
