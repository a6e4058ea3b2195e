"""Exception hierarchy.

Every error raised by the library names the module and the operation that
rejected its input, so the CLI can surface ``module.operation: cause``
diagnostics without inspecting tracebacks.
"""

from __future__ import annotations

import numpy as np


class MobGraphError(ValueError):
    """Base class for all rejections raised by :mod:`mobgraph`."""

    module = "mobgraph"

    def __init__(self, operation: str, cause: str):
        self.operation = operation
        self.cause = cause
        super().__init__(f"{self.module}.{operation}: {cause}")


class GraphError(MobGraphError):
    module = "graph"


class ConstructError(MobGraphError):
    module = "construct"


class CentralityError(MobGraphError):
    module = "centrality"


class SpectralError(MobGraphError):
    module = "spectral"


class LaplacianError(MobGraphError):
    module = "laplacian"


class FlowError(MobGraphError):
    module = "flows"


class NotStronglyConnectedError(SpectralError):
    """Raised when an operation needs an irreducible transition matrix."""

    def __init__(self, operation: str, n_components: int, module: str | None = None):
        self.n_components = n_components
        if module is not None:
            self.module = module
        super().__init__(
            operation,
            f"graph is not strongly connected ({n_components} strong components); "
            "restrict to the largest strong component first",
        )


class ConvergenceError(MobGraphError):
    """Iterative solver stopped at ``max_iter`` without meeting ``tol``.

    The last iterate and its residual are kept so callers can decide whether
    the partial answer is usable.
    """

    def __init__(
        self,
        module: str,
        operation: str,
        iterate: np.ndarray,
        residual: float,
        iterations: int,
    ):
        self.module = module
        self.iterate = iterate
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            operation,
            f"no convergence after {iterations} iterations (residual {residual:.3e})",
        )
