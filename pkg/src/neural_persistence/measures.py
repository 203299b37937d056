"""Scalar summaries of layer persistence diagrams and their bounds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (EssentialPolicy, NetworkSnapshot, PersistenceDiagram,
                   WeightedBipartiteLayer, compute_diagram, transform_values)
from .errors import InvalidArgument

DEFAULT_P = 2.0


@dataclass(frozen=True)
class BoundsPair:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise InvalidArgument(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class LayerReport:
    """Everything `compute_layer_report` derives for one layer."""

    neural_persistence: float
    normalized: float
    theoretical: BoundsPair
    empirical: BoundsPair
    finite_points: int
    essential_count: int


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise InvalidArgument(f"p must be >= 1, got {p}")
    return p


def _pnorm(x: np.ndarray, p: float) -> float:
    if len(x) == 0:
        return 0.0
    if p == 1:
        return float(np.sum(np.abs(x)))
    if p == 2:
        return float(np.sqrt(np.sum(x * x)))
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def neural_persistence(diagram: PersistenceDiagram, p: float = DEFAULT_P) -> float:
    """p-norm of the diagram's persistences ``1 - death``.

    Essential components count as ``(1, 0)`` only under ``DEATH_ZERO``.
    """
    return _pnorm(diagram.persistences(), _check_p(p))


def layer_neural_persistence(layer: WeightedBipartiteLayer, global_max: float | None = None,
                             p: float = DEFAULT_P, policy=EssentialPolicy.SKIP) -> float:
    return neural_persistence(compute_diagram(layer, global_max, policy), p)


def theoretical_upper_bound(layer: WeightedBipartiteLayer, global_max: float | None = None,
                            p: float = DEFAULT_P) -> float:
    """``(max w' - min w') * (n - 1)^(1/p)`` with ``n = in_count + out_count``."""
    p = _check_p(p)
    if global_max is None:
        global_max = layer.max_abs()
    t = transform_values(layer.values, global_max)
    return float((t.max() - t.min()) * (layer.vertex_count - 1) ** (1.0 / p))


def theoretical_bounds(layer, global_max=None, p=DEFAULT_P) -> BoundsPair:
    return BoundsPair(0.0, theoretical_upper_bound(layer, global_max, p))


def empirical_bounds(k: int, sorted_weights, p: float = DEFAULT_P) -> BoundsPair:
    """Bounds on NP from the k largest and k smallest transformed weights.

    ``sorted_weights`` must be non-descending. The lower bound uses the k
    largest weights, the upper bound the k smallest.
    """
    p = _check_p(p)
    w = np.asarray(sorted_weights, dtype=np.float64)
    if k < 0 or k > len(w):
        raise InvalidArgument(f"k={k} must lie in [0, {len(w)}]")
    if len(w) > 1 and np.any(np.diff(w) < 0):
        raise InvalidArgument("weights must be sorted in non-descending order")
    if k == 0:
        return BoundsPair(0.0, 0.0)
    return BoundsPair(_pnorm(1.0 - w[len(w) - k:], p), _pnorm(1.0 - w[:k], p))


def layer_empirical_bounds(layer: WeightedBipartiteLayer, global_max: float | None = None,
                           p: float = DEFAULT_P, length: str = "finite") -> BoundsPair:
    """Empirical bounds for a layer.

    ``length="finite"`` uses as many weights as the diagram has finite
    points, which is what makes the sandwich hold for SKIP diagrams.
    ``length="vertices"`` uses one weight per vertex; the extra term makes
    the lower bound valid only against DEATH_ZERO diagrams of connected
    layers, and the upper bound is not guaranteed at all.
    """
    if global_max is None:
        global_max = layer.max_abs()
    t = np.sort(transform_values(layer.values, global_max))
    if length == "finite":
        k = compute_diagram(layer, global_max).finite_count
    elif length == "vertices":
        k = layer.vertex_count
    else:
        raise InvalidArgument(f"unknown length mode {length!r}")
    return empirical_bounds(k, t, p)


def normalization_divisor(vertex_count: int, p: float = DEFAULT_P, value_range: float = 1.0) -> float:
    if vertex_count < 2:
        raise InvalidArgument("normalization needs at least two vertices")
    return value_range * (vertex_count - 1) ** (1.0 / _check_p(p))


def normalized_neural_persistence(layer: WeightedBipartiteLayer, global_max: float | None = None,
                                  p: float = DEFAULT_P, policy=EssentialPolicy.SKIP,
                                  observed_range: bool = False) -> float:
    """NP divided by the largest value a layer with this many vertices can reach.

    By default the divisor assumes the full transformed range [0, 1] so the
    value is comparable across layers and training steps. With
    ``observed_range`` the layer's own ``max w' - min w'`` is used; a
    constant layer then yields 0.
    """
    if global_max is None:
        global_max = layer.max_abs()
    np_value = layer_neural_persistence(layer, global_max, p, policy)
    if observed_range:
        t = transform_values(layer.values, global_max)
        spread = float(t.max() - t.min())
        if spread == 0:
            return 0.0
        return np_value / normalization_divisor(layer.vertex_count, p, spread)
    return np_value / normalization_divisor(layer.vertex_count, p)


def per_layer_normalized(network: NetworkSnapshot, p: float = DEFAULT_P,
                         policy=EssentialPolicy.SKIP) -> list[float]:
    global_max = network.global_max()
    return [normalized_neural_persistence(layer, global_max, p, policy) for layer in network.layers]


def mean_normalized_neural_persistence(network: NetworkSnapshot, p: float = DEFAULT_P,
                                       policy=EssentialPolicy.SKIP) -> float:
    """Average of the per-layer normalized values, using one network-wide max."""
    if not isinstance(network, NetworkSnapshot):
        network = NetworkSnapshot.from_matrices(network)
    values = per_layer_normalized(network, p, policy)
    return float(sum(values) / len(values))


def compute_layer_report(layer: WeightedBipartiteLayer, global_max: float | None = None,
                         p: float = DEFAULT_P, policy=EssentialPolicy.SKIP) -> LayerReport:
    if global_max is None:
        global_max = layer.max_abs()
    diagram = compute_diagram(layer, global_max, policy)
    value = neural_persistence(diagram, p)
    t = np.sort(transform_values(layer.values, global_max))
    return LayerReport(
        neural_persistence=value,
        normalized=value / normalization_divisor(layer.vertex_count, p),
        theoretical=BoundsPair(0.0, float((t[-1] - t[0]) * (layer.vertex_count - 1) ** (1.0 / p))),
        empirical=empirical_bounds(diagram.finite_count, t, p),
        finite_points=diagram.finite_count,
        essential_count=diagram.essential_count,
    )
