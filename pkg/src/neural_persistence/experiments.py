"""Desk-scale versions of the regime, initialization and depth experiments."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import EssentialPolicy, WeightedBipartiteLayer, compute_diagram, transform_values
from .errors import InvalidArgument
from .measures import (empirical_bounds, mean_normalized_neural_persistence, neural_persistence,
                       theoretical_upper_bound)
from .trainer import MlpSpec, TrainConfig, init_weights, make_blobs, train

REGIME_LABELS = ("trained", "diverging", "random_gaussian", "random_uniform")


@dataclass
class RegimeSample:
    label: str
    neural_persistence: list = field(default_factory=list)
    lower_bound: list = field(default_factory=list)
    upper_bound: list = field(default_factory=list)
    accuracy: list = field(default_factory=list)

    def quartiles(self) -> tuple[float, float, float]:
        q1, med, q3 = np.percentile(self.neural_persistence, [25, 50, 75])
        return float(q1), float(med), float(q3)


def layer_np_and_bounds(matrix, p: float = 2.0) -> tuple[float, float, float]:
    """NP of a single matrix (its own max as scale) with the empirical lower bound and theoretical upper bound."""
    layer = WeightedBipartiteLayer.dense(matrix)
    gmax = layer.max_abs()
    diagram = compute_diagram(layer, gmax, EssentialPolicy.SKIP)
    t = np.sort(transform_values(layer.values, gmax))
    lower = empirical_bounds(diagram.finite_count, t, p).lower
    return neural_persistence(diagram, p), lower, theoretical_upper_bound(layer, gmax, p)


def regime_experiment(runs: int = 50, seed: int = 0, n_features: int = 20, n_classes: int = 4,
                      informative: int = 5, epochs: int = 5, eta: float = 0.5,
                      diverge_eta: float = 50.0, p: float = 2.0) -> dict:
    """Perceptron NP for trained, diverging and random weight matrices.

    Each run draws a fresh blobs dataset; the trained and diverging
    perceptrons start from the same small Gaussian initialization and differ
    only in learning rate. Random matrices have the perceptron's shape.
    """
    if runs < 1:
        raise InvalidArgument("runs must be positive")
    samples = {label: RegimeSample(label) for label in REGIME_LABELS}
    spec = MlpSpec((n_features, n_classes))
    for r in range(runs):
        run_seed = seed * 100_003 + r
        ds = make_blobs(600, n_features, n_classes, informative=informative, seed=run_seed)
        rng = np.random.default_rng(run_seed)
        mats = {}
        for label, lr in (("trained", eta), ("diverging", diverge_eta)):
            cfg = TrainConfig(learning_rate=lr, epochs=epochs, batch_size=32, seed=run_seed,
                              init="gaussian(0.01)")
            result = train(spec, ds, cfg)
            snap = result.snapshots[-1]
            mats[label] = snap.layers[0].to_dense()
            samples[label].accuracy.append(float(result.traces["test_accuracy"].values[-1]))
        mats["random_gaussian"] = rng.normal(size=(n_classes, n_features))
        mats["random_uniform"] = rng.uniform(-1.0, 1.0, size=(n_classes, n_features))
        for label, mat in mats.items():
            value, lower, upper = layer_np_and_bounds(mat, p)
            s = samples[label]
            s.neural_persistence.append(value)
            s.lower_bound.append(lower)
            s.upper_bound.append(upper)
    return samples


def init_contrast(layer_sizes=(20, 20, 20), schemes=("beta(0.005,0.5)", "xavier"), seeds: int = 20,
                  p: float = 2.0) -> dict:
    """Mean normalized NP of untrained networks per initialization scheme."""
    spec = MlpSpec(layer_sizes)
    out = {}
    for scheme in schemes:
        values = [mean_normalized_neural_persistence(init_weights(spec, scheme, s), p) for s in range(seeds)]
        out[scheme] = {"mean": float(np.mean(values)), "std": float(np.std(values)), "values": values}
    return out


def depth_variability(depths=(1, 2, 3), runs: int = 20, seed: int = 0, base_width: int = 20,
                      n_features: int = 20, n_classes: int = 4, epochs: int = 15,
                      learning_rate: float = 3e-4, optimizer: str = "adam") -> dict:
    """Spread of final mean normalized NP across runs for growing depth.

    Dispersion is the interquartile range over runs. All depths see the same
    dataset seeds.
    """
    out = {}
    for depth in depths:
        if depth < 1:
            raise InvalidArgument("depth must be at least 1")
        spec = MlpSpec((n_features, *([base_width] * depth), n_classes))
        values = []
        for r in range(runs):
            run_seed = seed * 100_003 + r
            ds = make_blobs(600, n_features, n_classes, informative=5, seed=run_seed)
            cfg = TrainConfig(learning_rate=learning_rate, epochs=epochs, batch_size=32,
                              seed=run_seed, optimizer=optimizer)
            result = train(spec, ds, cfg)
            values.append(float(result.traces["np_mean_normalized"].values[-1]))
        q1, q3 = np.percentile(values, [25, 75])
        out[depth] = {"mean": float(np.mean(values)), "iqr": float(q3 - q1), "values": values}
    return out
