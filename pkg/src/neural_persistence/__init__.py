"""Neural persistence: zero-dimensional persistent homology of network weights."""
from .core import (EssentialPolicy, NetworkSnapshot, PersistenceDiagram, PersistencePoint, UnionFind,
                   WeightedBipartiteLayer, build_filtration, compute_diagram, mst_oracle,
                   transform_weights)
from .errors import DegenerateNetwork, InvalidArgument, NeuralPersistenceError
from .measures import (BoundsPair, empirical_bounds, layer_empirical_bounds, layer_neural_persistence,
                       mean_normalized_neural_persistence, neural_persistence,
                       normalized_neural_persistence, theoretical_upper_bound)

__version__ = "0.1.0"

__all__ = [
    "BoundsPair", "DegenerateNetwork", "EssentialPolicy", "InvalidArgument", "NetworkSnapshot",
    "NeuralPersistenceError", "PersistenceDiagram", "PersistencePoint", "UnionFind",
    "WeightedBipartiteLayer", "build_filtration", "compute_diagram", "empirical_bounds",
    "layer_empirical_bounds", "layer_neural_persistence", "mean_normalized_neural_persistence",
    "mst_oracle", "neural_persistence", "normalized_neural_persistence", "theoretical_upper_bound",
    "transform_weights",
]
