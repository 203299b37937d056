"""Neural persistence of convolutional filters.

A stride-1 convolution of one input map with one filter is a sparse
bipartite layer: each output position connects to the ``p x q`` padded
input positions of its receptive field. `conv_np_exact` runs the general
persistence computation on that unrolled layer; `conv_np_approx` uses the
closed-form shortcut that only needs the sorted filter values.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .core import EssentialPolicy, WeightedBipartiteLayer, compute_diagram, transform_values
from .errors import InvalidArgument
from .measures import DEFAULT_P, _check_p, neural_persistence


@dataclass(frozen=True, eq=False)
class ConvFilter:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise InvalidArgument(f"filter must be a non-empty 2-d array, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidArgument("filter weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def p_rows(self) -> int:
        return self.weights.shape[0]

    @property
    def q_cols(self) -> int:
        return self.weights.shape[1]

    def corner_positions(self) -> list[tuple[int, int]]:
        p, q = self.p_rows - 1, self.q_cols - 1
        # dict keeps order and drops coinciding corners of thin filters
        return list(dict.fromkeys([(0, 0), (0, q), (p, 0), (p, q)]))


@dataclass(frozen=True)
class ConvGeometry:
    h_in: int
    w_in: int
    padding: int = 0

    def __post_init__(self):
        if self.h_in < 1 or self.w_in < 1:
            raise InvalidArgument("input map must be at least 1x1")
        if self.padding < 0:
            raise InvalidArgument("padding must be non-negative")

    @property
    def h_padded(self) -> int:
        return self.h_in + 2 * self.padding

    @property
    def w_padded(self) -> int:
        return self.w_in + 2 * self.padding

    def output_shape(self, filt: ConvFilter) -> tuple[int, int]:
        h_out = self.h_padded - filt.p_rows + 1
        w_out = self.w_padded - filt.q_cols + 1
        if h_out < 1 or w_out < 1:
            raise InvalidArgument(
                f"{filt.p_rows}x{filt.q_cols} filter does not fit a "
                f"{self.h_padded}x{self.w_padded} padded input")
        return h_out, w_out

    def input_count(self) -> int:
        """Input neurons, padded dummies included."""
        return self.h_padded * self.w_padded

    def output_count(self, filt: ConvFilter) -> int:
        h_out, w_out = self.output_shape(filt)
        return h_out * w_out


def _as_filter(f) -> ConvFilter:
    return f if isinstance(f, ConvFilter) else ConvFilter(f)


def unroll_filter(filt, geo: ConvGeometry) -> WeightedBipartiteLayer:
    filt = _as_filter(filt)
    h_out, w_out = geo.output_shape(filt)
    p, q = filt.p_rows, filt.q_cols
    oi, oj, a, b = np.meshgrid(np.arange(h_out), np.arange(w_out), np.arange(p), np.arange(q),
                               indexing="ij")
    rows = (oi * w_out + oj).ravel()
    cols = ((oi + a) * geo.w_padded + (oj + b)).ravel()
    values = filt.weights[a, b].ravel()
    return WeightedBipartiteLayer.from_triplets(h_out * w_out, geo.input_count(), rows, cols, values)


def conv_np_exact(filt, geo: ConvGeometry, p: float = DEFAULT_P) -> float:
    """NP of the unrolled filter; surviving components count as death 0."""
    filt = _as_filter(filt)
    layer = unroll_filter(filt, geo)
    diagram = compute_diagram(layer, layer.max_abs(), EssentialPolicy.DEATH_ZERO)
    return neural_persistence(diagram, p)


def _approx_runs(filt: ConvFilter, geo: ConvGeometry) -> list[tuple[float, int]]:
    """Approximate diagram as ``(death, multiplicity)`` runs, in emission order."""
    w = filt.weights
    m = geo.input_count()
    n = geo.output_count(filt)
    tau = m + n
    h = transform_values(w, float(np.max(np.abs(w))))
    s = sorted(h.ravel().tolist(), reverse=True)
    corners = [float(h[i, j]) for i, j in filt.corner_positions()]
    corner_values = set(corners)

    runs = [(0.0, 1)]
    runs.extend((c, 1) for c in corners)
    t = 1 + len(corners)
    i = 0
    while t < tau:
        if i >= len(s):
            # filter values exhausted (disconnected unrolled graph): pad with the smallest one
            runs.append((s[-1], tau - t))
            break
        v = s[i]
        n_new = n - (v in corner_values)
        if t + n_new <= tau:
            runs.append((v, n_new))
            t += n_new
            i += 1
        else:
            runs.append((v, tau - t))
            t = tau
    return runs


@dataclass(frozen=True)
class ConvDiagramApprox:
    deaths: tuple

    def __len__(self):
        return len(self.deaths)


def conv_diagram_approx(filt, geo: ConvGeometry) -> ConvDiagramApprox:
    runs = _approx_runs(_as_filter(filt), geo)
    return ConvDiagramApprox(tuple(v for v, count in runs for _ in range(count)))


def conv_np_approx(filt, geo: ConvGeometry, p: float = DEFAULT_P) -> float:
    p = _check_p(p)
    total = sum(count * (1.0 - v) ** p for v, count in _approx_runs(_as_filter(filt), geo))
    return math.sqrt(total) if p == 2 else total ** (1.0 / p)


_METHODS = {"exact": conv_np_exact, "approx": conv_np_approx}


def conv_normalizer(filt, geo: ConvGeometry, p: float = DEFAULT_P) -> float:
    tau = geo.input_count() + geo.output_count(_as_filter(filt))
    return (tau - 1) ** (1.0 / _check_p(p))


def normalized_conv_np(filt, geo: ConvGeometry, p: float = DEFAULT_P, method: str = "approx") -> float:
    try:
        fn = _METHODS[method]
    except KeyError:
        raise InvalidArgument(f"unknown method {method!r}; use 'exact' or 'approx'") from None
    filt = _as_filter(filt)
    return fn(filt, geo, p) / conv_normalizer(filt, geo, p)


def layer_mean_conv_np(filters, geo: ConvGeometry, p: float = DEFAULT_P, method: str = "approx") -> float:
    """Mean normalized NP over a bank of filters sharing one geometry."""
    filters = [_as_filter(f) for f in filters]
    if not filters:
        raise InvalidArgument("need at least one filter")
    values = [normalized_conv_np(f, geo, p, method) for f in filters]
    return float(sum(values) / len(values))


def compare_methods(filt, geo: ConvGeometry, p: float = DEFAULT_P, repeats: int = 1) -> dict:
    """Run both methods on one filter and report values and wall-clock seconds."""
    filt = _as_filter(filt)
    out = {}
    for name, fn in _METHODS.items():
        start = time.perf_counter()
        for _ in range(repeats):
            value = fn(filt, geo, p)
        out[name] = {"value": value, "seconds": (time.perf_counter() - start) / repeats}
    return out
