"""Desk-scale MLP training and random-network generators.

Everything here is plain numpy and deterministic given the seeds. Networks
use ReLU hidden layers and a softmax cross-entropy output; weight matrices
are stored ``[out, in]`` so they map directly onto layer graphs.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import NetworkSnapshot
from .earlystop import Direction, MetricTrace
from .errors import InvalidArgument
from .measures import mean_normalized_neural_persistence

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or min(sizes) < 1:
            raise InvalidArgument(f"need at least two positive layer sizes, got {sizes}")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return [(o, i) for i, o in zip(self.layer_sizes[:-1], self.layer_sizes[1:])]


class Optimizer(enum.Enum):
    SGD = "sgd"
    ADAM = "adam"


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0
    snapshot_interval: int = 1
    steps_per_epoch: int = 4
    optimizer: Optimizer = Optimizer.SGD
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    init: str = "xavier"
    p: float = 2.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidArgument("learning rate must be positive")
        if self.epochs < 0:
            raise InvalidArgument("epochs must be non-negative")
        if self.batch_size < 1 or self.snapshot_interval < 1 or self.steps_per_epoch < 1:
            raise InvalidArgument("batch_size, snapshot_interval and steps_per_epoch must be positive")
        self.optimizer = Optimizer(self.optimizer)


@dataclass
class SyntheticDataset:
    features: np.ndarray
    labels: np.ndarray
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    name: str = ""

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise InvalidArgument("features and labels differ in length")
        all_idx = np.concatenate([self.train_idx, self.val_idx, self.test_idx])
        if len(all_idx) != len(self.labels) or len(np.unique(all_idx)) != len(all_idx):
            raise InvalidArgument("splits must be disjoint and cover every sample")

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def split(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        idx = {"train": self.train_idx, "val": self.val_idx, "test": self.test_idx}[name]
        return self.features[idx], self.labels[idx]


def _split(features, labels, rng, fractions, name) -> SyntheticDataset:
    n = len(labels)
    perm = rng.permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    return SyntheticDataset(features, labels, np.sort(perm[:n_train]),
                            np.sort(perm[n_train:n_train + n_val]),
                            np.sort(perm[n_train + n_val:]), name)


def make_blobs(n_samples=1000, n_features=20, n_classes=4, informative=None, spread=1.0,
               separation=4.0, seed=0, fractions=(0.6, 0.2, 0.2)) -> SyntheticDataset:
    """Gaussian class clusters; only the first ``informative`` features carry signal."""
    rng = np.random.default_rng(seed)
    informative = n_features if informative is None else informative
    centers = np.zeros((n_classes, n_features))
    centers[:, :informative] = rng.normal(scale=separation, size=(n_classes, informative))
    labels = rng.integers(0, n_classes, size=n_samples)
    features = centers[labels] + rng.normal(scale=spread, size=(n_samples, n_features))
    return _split(features, labels, rng, fractions, "blobs")


def make_rings(n_samples=1000, n_classes=2, noise=0.1, extra_features=0, seed=0,
               fractions=(0.6, 0.2, 0.2)) -> SyntheticDataset:
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, n_classes, size=n_samples)
    angle = rng.uniform(0, 2 * np.pi, n_samples)
    radius = 1.0 + labels + rng.normal(scale=noise, size=n_samples)
    features = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
    if extra_features:
        features = np.hstack([features, rng.normal(scale=noise, size=(n_samples, extra_features))])
    return _split(features, labels, rng, fractions, "rings")


def make_xor(n_samples=1000, grid=2, noise=0.15, extra_features=0, seed=0,
             fractions=(0.6, 0.2, 0.2)) -> SyntheticDataset:
    """Checkerboard of ``grid x grid`` cells with alternating labels."""
    rng = np.random.default_rng(seed)
    cells = rng.integers(0, grid, size=(n_samples, 2))
    labels = (cells.sum(axis=1) % 2).astype(np.int64)
    features = cells + 0.5 + rng.normal(scale=noise, size=(n_samples, 2)) - grid / 2
    if extra_features:
        features = np.hstack([features, rng.normal(scale=noise, size=(n_samples, extra_features))])
    return _split(features, labels, rng, fractions, "xor")


PRESETS = {"blobs": make_blobs, "rings": make_rings, "xor": make_xor}


def make_dataset(preset: str, seed: int = 0, **kwargs) -> SyntheticDataset:
    try:
        return PRESETS[preset](seed=seed, **kwargs)
    except KeyError:
        raise InvalidArgument(f"unknown dataset preset {preset!r}") from None


def parse_init(scheme: str) -> tuple[str, tuple]:
    """Parse ``"name"`` or ``"name(a,b)"`` into a name and float arguments."""
    scheme = scheme.strip().lower()
    if "(" not in scheme:
        return scheme, ()
    name, args = scheme.split("(", 1)
    if not args.endswith(")"):
        raise InvalidArgument(f"malformed init scheme {scheme!r}")
    try:
        params = tuple(float(a) for a in args[:-1].split(",") if a.strip())
    except ValueError:
        raise InvalidArgument(f"non-numeric parameter in init scheme {scheme!r}") from None
    return name.strip(), params


def sample_matrix(shape, scheme: str, rng: np.random.Generator) -> np.ndarray:
    """One weight matrix of shape ``(out, in)``.

    Schemes: ``xavier`` (normal, variance 2/(fan_in+fan_out)),
    ``xavier_uniform``, ``gaussian(sigma)``, ``uniform(a,b)``,
    ``beta(alpha,beta)`` with random signs, and ``zeros``.
    """
    name, params = parse_init(scheme)
    fan_out, fan_in = shape
    if name == "xavier":
        return rng.normal(0.0, math.sqrt(2.0 / (fan_in + fan_out)), size=shape)
    if name == "xavier_uniform":
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=shape)
    if name == "gaussian":
        sigma = params[0] if params else 1.0
        if sigma <= 0:
            raise InvalidArgument("gaussian sigma must be positive")
        return rng.normal(0.0, sigma, size=shape)
    if name == "uniform":
        a, b = params if params else (-1.0, 1.0)
        if not a < b:
            raise InvalidArgument("uniform bounds need a < b")
        return rng.uniform(a, b, size=shape)
    if name == "beta":
        alpha, beta = params if params else (0.005, 0.5)
        if alpha <= 0 or beta <= 0:
            raise InvalidArgument("beta parameters must be positive")
        return rng.beta(alpha, beta, size=shape) * rng.choice([-1.0, 1.0], size=shape)
    if name == "zeros":
        return np.zeros(shape)
    raise InvalidArgument(f"unknown init scheme {scheme!r}")


def init_weights(spec: MlpSpec, scheme: str = "xavier", seed: int = 0) -> NetworkSnapshot:
    rng = np.random.default_rng(seed)
    mats = [sample_matrix(shape, scheme, rng) for shape in spec.shapes]
    return NetworkSnapshot.from_matrices(mats, step=0, init=scheme, seed=seed)


class Mlp:
    """ReLU network with softmax output, trained by backprop."""

    def __init__(self, weights, biases=None):
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        self.biases = ([np.zeros(w.shape[0]) for w in self.weights] if biases is None
                       else [np.array(b, dtype=np.float64) for b in biases])

    @classmethod
    def initialize(cls, spec: MlpSpec, scheme: str = "xavier", seed: int = 0) -> "Mlp":
        snap = init_weights(spec, scheme, seed)
        return cls([layer.to_dense() for layer in snap.layers])

    def params(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def forward(self, x):
        acts = [x]
        pre = []
        h = x
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            pre.append(z)
            h = np.maximum(z, 0.0) if k < len(self.weights) - 1 else z
            acts.append(h)
        return pre, acts

    def logits(self, x) -> np.ndarray:
        return self.forward(x)[1][-1]

    def loss(self, x, y) -> float:
        return float(cross_entropy(self.logits(x), y)[0])

    def gradients(self, x, y):
        """Mean cross-entropy and its gradients (weights first, then biases)."""
        pre, acts = self.forward(x)
        loss, dz = cross_entropy(acts[-1], y)
        gw = [None] * len(self.weights)
        gb = [None] * len(self.weights)
        for k in range(len(self.weights) - 1, -1, -1):
            gw[k] = dz.T @ acts[k]
            gb[k] = dz.sum(axis=0)
            if k:
                dz = (dz @ self.weights[k]) * (pre[k - 1] > 0)
        return loss, gw + gb

    def accuracy(self, x, y) -> float:
        return float(np.mean(np.argmax(self.logits(x), axis=1) == y))

    def snapshot(self, step: int = 0, **meta) -> NetworkSnapshot:
        return NetworkSnapshot.from_matrices(self.weights, step=step, **meta)


def cross_entropy(logits: np.ndarray, y: np.ndarray):
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    z = logits - logits.max(axis=1, keepdims=True)
    with np.errstate(over="ignore", invalid="ignore"):
        logsum = np.log(np.exp(z).sum(axis=1))
        logp = z - logsum[:, None]
    n = len(y)
    loss = -logp[np.arange(n), y].mean()
    grad = np.exp(logp)
    grad[np.arange(n), y] -= 1.0
    return loss, grad / n


class _Adam:
    def __init__(self, params, beta1, beta2, eps):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def step(self, params, grads, lr):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1 - b1 ** self.t
        c2 = 1 - b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class TrainResult:
    snapshots: list
    traces: dict
    model: Mlp
    diverged: bool = False
    meta: dict = field(default_factory=dict)


TRACE_DIRECTIONS = {
    "np_mean_normalized": Direction.MAXIMIZE,
    "val_loss": Direction.MINIMIZE,
    "val_accuracy": Direction.MAXIMIZE,
    "test_accuracy": Direction.MAXIMIZE,
    "train_loss": Direction.MINIMIZE,
    "weight_pnorm": Direction.MAXIMIZE,
}


def _weight_pnorm(weights, p) -> float:
    flat = np.concatenate([np.abs(w).ravel() for w in weights])
    return float(np.sum(flat ** p) ** (1.0 / p))


def train(spec: MlpSpec, dataset: SyntheticDataset, config: TrainConfig,
          model: Mlp | None = None) -> TrainResult:
    """Minibatch training with evaluation every ``1/steps_per_epoch`` epoch.

    Step 0 is the initialization; a snapshot is kept every
    ``snapshot_interval`` steps. A non-finite loss or weight stops training
    and marks the run as diverged; snapshots taken before that stay valid.
    """
    if dataset.n_classes > spec.layer_sizes[-1] or dataset.n_features != spec.layer_sizes[0]:
        raise InvalidArgument(
            f"dataset ({dataset.n_features} features, {dataset.n_classes} classes) does not fit "
            f"architecture {spec.layer_sizes}")
    rng = np.random.default_rng(config.seed)
    if model is None:
        model = Mlp.initialize(spec, config.init, seed=config.seed)
    x_tr, y_tr = dataset.split("train")
    x_va, y_va = dataset.split("val")
    x_te, y_te = dataset.split("test")
    n = len(y_tr)
    n_batches = max(1, math.ceil(n / config.batch_size))
    spe = config.steps_per_epoch
    if n_batches < spe:
        raise InvalidArgument(f"{n_batches} batches per epoch cannot be split into {spe} evaluation steps")
    # batch index after which each 1/spe epoch ends
    checkpoints = {(k + 1) * n_batches // spe - 1: k + 1 for k in range(spe)}

    traces = {name: [] for name in TRACE_DIRECTIONS}
    snapshots = []
    params = model.params()
    adam = (_Adam(params, config.beta1, config.beta2, config.eps)
            if config.optimizer is Optimizer.ADAM else None)
    diverged = False
    running = []

    def record(step):
        train_loss = float(np.mean(running)) if running else model.loss(x_tr, y_tr)
        running.clear()
        snap = model.snapshot(step=step)
        values = {
            "np_mean_normalized": mean_normalized_neural_persistence(snap, config.p),
            "val_loss": model.loss(x_va, y_va),
            "val_accuracy": model.accuracy(x_va, y_va),
            "test_accuracy": model.accuracy(x_te, y_te),
            "train_loss": train_loss,
            "weight_pnorm": _weight_pnorm(model.weights, config.p),
        }
        for name, v in values.items():
            traces[name].append((step, v))
        if step % config.snapshot_interval == 0:
            snapshots.append(snap)

    record(0)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for bi in range(n_batches):
            idx = order[bi * config.batch_size:(bi + 1) * config.batch_size]
            with np.errstate(all="ignore"):
                loss, grads = model.gradients(x_tr[idx], y_tr[idx])
                if adam is None:
                    for p_, g in zip(params, grads):
                        p_ -= config.learning_rate * g
                else:
                    adam.step(params, grads, config.learning_rate)
            if not np.isfinite(loss) or not all(np.all(np.isfinite(p_)) for p_ in params):
                log.warning("training diverged in epoch %d, batch %d", epoch, bi)
                diverged = True
                break
            running.append(loss)
            if bi in checkpoints:
                record(epoch * spe + checkpoints[bi])
        if diverged:
            break

    out = {name: MetricTrace(np.array([s for s, _ in rows], dtype=np.int64),
                             np.array([v for _, v in rows]), TRACE_DIRECTIONS[name], name)
           for name, rows in traces.items()}
    return TrainResult(snapshots, out, model, diverged,
                       {"layer_sizes": list(spec.layer_sizes), "seed": config.seed})
