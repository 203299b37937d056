"""Zero-dimensional persistent homology of bipartite layer graphs.

A layer with ``in_count`` inputs and ``out_count`` outputs is viewed as a
bipartite graph whose vertices all exist from the start of the filtration
(birth 1.0). Edges enter in order of non-ascending transformed weight
``|w| / w_max``; every edge that merges two components kills one of them and
records a point ``(1, w')`` in the diagram.

Vertex numbering used throughout: inputs are ``0 .. in_count - 1``, outputs
are ``in_count .. in_count + out_count - 1``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DegenerateNetwork, InvalidArgument


class EssentialPolicy(enum.Enum):
    """How components that survive the whole filtration are accounted for."""

    SKIP = "skip"
    DEATH_ZERO = "zero"

    @classmethod
    def parse(cls, value: "EssentialPolicy | str") -> "EssentialPolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidArgument(f"unknown essential policy {value!r}") from None


@dataclass(frozen=True, eq=False)
class WeightedBipartiteLayer:
    """One layer of a feedforward network as a weighted bipartite graph.

    ``weights`` is indexed ``[output, input]``. For sparse layers only the
    listed ``(rows, cols)`` entries are edges; for dense layers every entry of
    the matrix is an edge, including zeros.
    """

    in_count: int
    out_count: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    sparse: bool = False

    def __post_init__(self):
        if self.in_count < 1 or self.out_count < 1:
            raise InvalidArgument(
                f"layer needs at least one input and one output, got "
                f"{self.in_count}x{self.out_count}")
        # private copies: a view of a live weight matrix would change under training
        rows = np.array(self.rows, dtype=np.int64)
        cols = np.array(self.cols, dtype=np.int64)
        values = np.array(self.values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise InvalidArgument("rows, cols and values must be 1-d arrays of equal length")
        if len(values) == 0:
            raise InvalidArgument("layer has no edges")
        if rows.min() < 0 or rows.max() >= self.out_count:
            raise InvalidArgument("row index out of range")
        if cols.min() < 0 or cols.max() >= self.in_count:
            raise InvalidArgument("column index out of range")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("weights must be finite")
        if self.sparse:
            keys = rows * self.in_count + cols
            if len(np.unique(keys)) != len(keys):
                raise InvalidArgument("duplicate (row, column) entries in sparse layer")
        elif len(values) != self.in_count * self.out_count:
            raise InvalidArgument("dense layer must list every entry")
        for name, arr in (("rows", rows), ("cols", cols), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def dense(cls, matrix) -> "WeightedBipartiteLayer":
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2:
            raise InvalidArgument(f"weight matrix must be 2-d, got shape {m.shape}")
        out_count, in_count = m.shape
        if out_count == 0 or in_count == 0:
            raise InvalidArgument("layer needs at least one input and one output")
        rows, cols = np.indices(m.shape)
        return cls(in_count, out_count, rows.ravel(), cols.ravel(), m.ravel(), sparse=False)

    @classmethod
    def from_triplets(cls, out_count: int, in_count: int, rows, cols, values) -> "WeightedBipartiteLayer":
        return cls(in_count, out_count, rows, cols, values, sparse=True)

    @property
    def vertex_count(self) -> int:
        return self.in_count + self.out_count

    @property
    def edge_count(self) -> int:
        return len(self.values)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.out_count, self.in_count)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_dense(self, fill: float = 0.0) -> np.ndarray:
        m = np.full(self.shape, fill, dtype=np.float64)
        m[self.rows, self.cols] = self.values
        return m

    def scaled(self, factor: float) -> "WeightedBipartiteLayer":
        return WeightedBipartiteLayer(self.in_count, self.out_count, self.rows,
                                      self.cols, self.values * factor, self.sparse)

    def __eq__(self, other):
        if not isinstance(other, WeightedBipartiteLayer):
            return NotImplemented
        return (self.in_count == other.in_count and self.out_count == other.out_count
                and self.sparse == other.sparse
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols)
                and np.array_equal(self.values, other.values))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NetworkSnapshot:
    """Ordered layers of a network captured at one training step."""

    layers: tuple
    step: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise InvalidArgument("snapshot has no layers")
        object.__setattr__(self, "layers", layers)

    @classmethod
    def from_matrices(cls, matrices, step: int = 0, **meta) -> "NetworkSnapshot":
        return cls(tuple(WeightedBipartiteLayer.dense(m) for m in matrices), step, dict(meta))

    def global_max(self) -> float:
        return max(layer.max_abs() for layer in self.layers)

    def __len__(self):
        return len(self.layers)

    def __iter__(self):
        return iter(self.layers)

    def __eq__(self, other):
        if not isinstance(other, NetworkSnapshot):
            return NotImplemented
        return self.step == other.step and self.meta == other.meta and self.layers == other.layers

    __hash__ = None


class UnionFind:
    """Disjoint-set forest over ``0 .. size - 1`` with union by rank and path halving."""

    __slots__ = ("parent", "rank", "components")

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size
        self.components = size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if they were already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        rank = self.rank
        if rank[ra] < rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if rank[ra] == rank[rb]:
            rank[ra] += 1
        self.components -= 1
        return True

    def __len__(self):
        return len(self.parent)


class PersistencePoint(NamedTuple):
    birth: float
    death: float

    @property
    def persistence(self) -> float:
        return abs(self.birth - self.death)


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Zero-dimensional diagram of one layer.

    ``deaths`` holds the merge values in the order they were emitted (never
    ascending). Essential components are not stored as points; they are
    added as ``(1, 0)`` on iteration when the policy is ``DEATH_ZERO``.
    """

    deaths: np.ndarray
    essential_count: int
    policy: EssentialPolicy = EssentialPolicy.SKIP

    def __post_init__(self):
        deaths = np.asarray(self.deaths, dtype=np.float64)
        deaths.setflags(write=False)
        object.__setattr__(self, "deaths", deaths)

    @property
    def finite_count(self) -> int:
        return len(self.deaths)

    def included_deaths(self) -> np.ndarray:
        if self.policy is EssentialPolicy.DEATH_ZERO and self.essential_count:
            return np.concatenate([self.deaths, np.zeros(self.essential_count)])
        return self.deaths

    def persistences(self) -> np.ndarray:
        return 1.0 - self.included_deaths()

    @property
    def points(self) -> list[PersistencePoint]:
        return [PersistencePoint(1.0, d) for d in self.included_deaths().tolist()]

    def __iter__(self) -> Iterator[PersistencePoint]:
        return iter(self.points)

    def __len__(self):
        return len(self.included_deaths())

    def with_policy(self, policy) -> "PersistenceDiagram":
        return PersistenceDiagram(self.deaths, self.essential_count, EssentialPolicy.parse(policy))

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return (self.essential_count == other.essential_count and self.policy is other.policy
                and np.array_equal(self.deaths, other.deaths))

    __hash__ = None


def _check_global_max(max_abs: float, global_max: float) -> None:
    if global_max == 0:
        raise DegenerateNetwork("all weights are zero; neural persistence is undefined")
    if not np.isfinite(global_max) or global_max < 0:
        raise InvalidArgument(f"global_max must be a positive finite number, got {global_max!r}")
    if max_abs > global_max:
        raise InvalidArgument(
            f"global_max={global_max!r} is smaller than the largest absolute weight {max_abs!r}")


def transform_values(values, global_max: float) -> np.ndarray:
    """Map raw weights to ``|w| / global_max`` in [0, 1].

    Results are rounded to single precision (and returned as float64) so
    that rescaling a network by any positive constant reproduces the same
    filtration values bit for bit; float64 division alone differs in the
    last ulp for about a quarter of all weights.
    """
    a = np.abs(np.asarray(values, dtype=np.float64))
    max_abs = float(a.max()) if a.size else 0.0
    _check_global_max(max_abs, float(global_max))
    return (a / global_max).astype(np.float32).astype(np.float64)


def transform_weights(layer, global_max: float | None = None) -> np.ndarray:
    """Transformed weights of ``layer`` as an ``out_count x in_count`` matrix.

    Accepts a `WeightedBipartiteLayer` or a plain matrix. Absent entries of a
    sparse layer are reported as NaN.
    """
    if not isinstance(layer, WeightedBipartiteLayer):
        layer = WeightedBipartiteLayer.dense(layer)
    if global_max is None:
        global_max = layer.max_abs()
    t = transform_values(layer.values, global_max)
    out = np.full(layer.shape, np.nan if layer.sparse else 0.0)
    out[layer.rows, layer.cols] = t
    return out


class Filtration(NamedTuple):
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.values)

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist()))


def _order_edges(rows, cols, values) -> Filtration:
    # lexsort: last key is primary -> (-value, row, col)
    order = np.lexsort((cols, rows, -values))
    return Filtration(rows[order], cols[order], values[order])


def build_filtration(transformed) -> Filtration:
    """Order edges by non-ascending weight, ties by (output, input) ascending.

    ``transformed`` is a dense matrix of filtration values; NaN entries are
    treated as absent edges.
    """
    m = np.asarray(transformed, dtype=np.float64)
    if m.ndim != 2:
        raise InvalidArgument("expected a 2-d matrix of transformed weights")
    rows, cols = np.nonzero(~np.isnan(m))
    return _order_edges(rows, cols, m[rows, cols])


def _layer_filtration(layer: WeightedBipartiteLayer, global_max: float | None) -> Filtration:
    if global_max is None:
        global_max = layer.max_abs()
    values = transform_values(layer.values, global_max)
    return _order_edges(layer.rows, layer.cols, values)


def compute_diagram(layer: WeightedBipartiteLayer, global_max: float | None = None,
                    policy: EssentialPolicy | str = EssentialPolicy.SKIP) -> PersistenceDiagram:
    """Zero-dimensional persistence diagram of ``layer``.

    ``global_max`` is the largest absolute weight of the whole network;
    it defaults to the layer's own maximum for standalone analysis.
    """
    policy = EssentialPolicy.parse(policy)
    filtration = _layer_filtration(layer, global_max)
    offset = layer.in_count
    uf = UnionFind(layer.vertex_count)
    union = uf.union
    deaths = []
    for r, c, w in zip(filtration.rows.tolist(), filtration.cols.tolist(),
                       filtration.values.tolist()):
        if union(c, offset + r):
            deaths.append(w)
            if uf.components == 1:
                break
    return PersistenceDiagram(np.array(deaths, dtype=np.float64), uf.components, policy)


def mst_oracle(layer: WeightedBipartiteLayer, global_max: float | None = None) -> np.ndarray:
    """Weights of a maximum spanning forest, found with Prim's algorithm.

    Independent of `compute_diagram`: no sorting and no union-find, just
    repeated selection of the heaviest edge leaving the current tree on a
    dense adjacency matrix. Returned in non-ascending order.
    """
    if global_max is None:
        global_max = layer.max_abs()
    weights = transform_values(layer.values, global_max)
    n = layer.vertex_count
    adj = np.full((n, n), -np.inf)
    u = layer.cols
    v = layer.rows + layer.in_count
    adj[u, v] = weights
    adj[v, u] = weights

    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, -np.inf)
    picked = []
    for _ in range(n):
        candidates = np.where(in_tree, -np.inf, best)
        nxt = int(np.argmax(candidates))
        if candidates[nxt] == -np.inf:
            # start a new tree of the forest at the first unvisited vertex
            nxt = int(np.argmin(in_tree))
        else:
            picked.append(candidates[nxt])
        in_tree[nxt] = True
        best = np.maximum(best, adj[nxt])
    return np.sort(np.array(picked, dtype=np.float64))[::-1]
