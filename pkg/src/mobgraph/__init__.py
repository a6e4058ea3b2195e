"""Graph analysis of mobility networks.

Region Adjacency and Origin-Destination graphs, node centralities, the
Perron vector and its circulation, six graph Laplacians, gravity-model
flows, CPC scoring and Laplacian population estimation.
"""

from .centrality import MetricTable, betweenness, closeness, harmonic, normalize, pagerank, quartile_bins
from .construct import (
    ODMatrix,
    Partition,
    Region,
    centroid,
    od_graph,
    read_od_csv,
    read_partition_geojson,
    region_adjacency_graph,
)
from .errors import ConvergenceError, MobGraphError, NotStronglyConnectedError
from .flows import FluxVector, GravitySpec, cpc, estimate_population, gravity_flows
from .graph import (
    ComponentDecomposition,
    Graph,
    build_graph,
    components,
    degrees,
    is_strongly_connected,
    largest_component_subgraph,
    prune_low_degree,
    reciprocal_weights,
    shortest_path_distances,
    sparsity_pattern,
    transition_matrix,
)
from .laplacian import (
    LaplacianKind,
    SpectrumReport,
    laplacian,
    laplacian_pseudoinverse,
    spectrum_report,
    symmetric_eigenvalues,
)
from .spectral import (
    CirculationField,
    PerronVector,
    average_node_circulation,
    circulation,
    perron_vector,
    perron_vector_generalized,
)

__version__ = "0.1.0"
