"""Patience-based early stopping and the burn-in/patience grid comparison.

Steps are integer evaluation indices (quarter epochs by default, so with
``steps_per_epoch=4`` step 4 is epoch 1.0). Patience ``g`` and burn-in ``b``
are given in epochs; the patience counter counts evaluations, so ``g``
epochs means ``g * steps_per_epoch`` evaluations without improvement.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


class Direction(enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"

    @property
    def sign(self) -> float:
        return 1.0 if self is Direction.MAXIMIZE else -1.0


@dataclass(frozen=True, eq=False)
class MetricTrace:
    steps: np.ndarray
    values: np.ndarray
    direction: Direction = Direction.MAXIMIZE
    name: str = ""

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if steps.ndim != 1 or steps.shape != values.shape:
            raise InvalidArgument("steps and values must be 1-d arrays of equal length")
        if len(steps) == 0:
            raise InvalidArgument(f"trace {self.name!r} is empty")
        if np.any(np.diff(steps) <= 0):
            raise InvalidArgument(f"trace {self.name!r}: steps must be strictly increasing")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, direction=Direction.MAXIMIZE, name="", start=0) -> "MetricTrace":
        values = np.asarray(values, dtype=np.float64)
        return cls(np.arange(start, start + len(values)), values, direction, name)

    def negated(self) -> "MetricTrace":
        flipped = Direction.MINIMIZE if self.direction is Direction.MAXIMIZE else Direction.MAXIMIZE
        return MetricTrace(self.steps, -self.values, flipped, self.name)

    def value_at(self, step: int) -> float:
        """Value at ``step``, or at the last recorded step before it."""
        idx = int(np.searchsorted(self.steps, step, side="right")) - 1
        if idx < 0:
            raise InvalidArgument(f"trace {self.name!r} has no sample at or before step {step}")
        return float(self.values[idx])

    @property
    def final_step(self) -> int:
        return int(self.steps[-1])

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class PatienceConfig:
    patience: int
    burn_in: int = 0
    delta_min: float = 0.0

    def __post_init__(self):
        if self.patience < 1:
            raise InvalidArgument("patience must be at least one epoch")
        if self.burn_in < 0:
            raise InvalidArgument("burn-in must be non-negative")
        if self.delta_min < 0:
            raise InvalidArgument("delta_min must be non-negative")


@dataclass(frozen=True)
class StopDecision:
    triggered: bool
    step: int
    best: float | None

    def epoch(self, steps_per_epoch: int) -> float:
        return self.step / steps_per_epoch


def patience_stop(trace: MetricTrace, config: PatienceConfig, steps_per_epoch: int = 4) -> StopDecision:
    """First step at which the patience counter reaches ``g`` epochs.

    Improvement is strict: a value counts only if it beats the best so far
    by more than ``delta_min`` in the trace's direction. The first monitored
    value always counts as an improvement.
    """
    if steps_per_epoch < 1:
        raise InvalidArgument("steps_per_epoch must be positive")
    threshold = config.patience * steps_per_epoch
    start = config.burn_in * steps_per_epoch
    sign = trace.direction.sign
    best = -np.inf
    counter = 0
    for step, raw in zip(trace.steps.tolist(), trace.values.tolist()):
        if step < start:
            continue
        value = sign * raw
        if value > best + config.delta_min:
            best, counter = value, 0
        else:
            counter += 1
        if counter >= threshold:
            return StopDecision(True, step, sign * best)
    return StopDecision(False, trace.final_step, None if best == -np.inf else sign * best)


@dataclass
class StopGridResult:
    """Per-cell comparison of persistence stopping against validation-loss stopping.

    Arrays are indexed ``[b, g - 1]`` for burn-in ``b`` in ``0 .. G-1`` and
    patience ``g`` in ``1 .. G``. Stop positions are in epochs; with several
    runs they are medians over runs, as are the accuracies.
    """

    epochs: int
    steps_per_epoch: int
    np_stop_epoch: np.ndarray
    loss_stop_epoch: np.ndarray
    np_accuracy: np.ndarray
    loss_accuracy: np.ndarray
    np_triggers: np.ndarray
    loss_triggers: np.ndarray
    runs: int = 1

    @property
    def delta_epoch(self) -> np.ndarray:
        return self.np_stop_epoch - self.loss_stop_epoch

    @property
    def delta_accuracy(self) -> np.ndarray:
        return self.np_accuracy - self.loss_accuracy

    @property
    def burn_ins(self) -> np.ndarray:
        return np.arange(self.epochs)

    @property
    def patiences(self) -> np.ndarray:
        return np.arange(1, self.epochs + 1)

    def common_mask(self) -> np.ndarray:
        """Cells where neither b nor g exceeds half the training length."""
        b, g = np.meshgrid(self.burn_ins, self.patiences, indexing="ij")
        half = self.epochs / 2
        return (b <= half) & (g <= half)

    def cells(self):
        de, da = self.delta_epoch, self.delta_accuracy
        for b in range(self.epochs):
            for gi in range(self.epochs):
                yield {
                    "burn_in": b,
                    "patience": gi + 1,
                    "np_stop_epoch": float(self.np_stop_epoch[b, gi]),
                    "loss_stop_epoch": float(self.loss_stop_epoch[b, gi]),
                    "np_accuracy": float(self.np_accuracy[b, gi]),
                    "loss_accuracy": float(self.loss_accuracy[b, gi]),
                    "delta_epoch": float(de[b, gi]),
                    "delta_accuracy": float(da[b, gi]),
                    "np_triggers": int(self.np_triggers[b, gi]),
                    "loss_triggers": int(self.loss_triggers[b, gi]),
                    "common": bool(self.common_mask()[b, gi]),
                }


def _check_axes(*traces: MetricTrace) -> None:
    first = traces[0].steps
    for t in traces[1:]:
        if not np.array_equal(first, t.steps):
            raise InvalidArgument(f"trace {t.name!r} does not share the step axis of {traces[0].name!r}")


def simulate_grid_runs(runs, epochs: int, steps_per_epoch: int = 4) -> StopGridResult:
    """Grid comparison over several runs.

    ``runs`` is a sequence of ``(np_trace, val_loss_trace, test_acc_trace)``.
    For every cell the stop epochs and accuracies are reduced to medians over
    runs before differencing. A criterion that never fires contributes the
    final step and final accuracy; trigger counts only include stops strictly
    before the final step.
    """
    runs = list(runs)
    if not runs:
        raise InvalidArgument("need at least one run")
    if epochs < 1:
        raise InvalidArgument("epochs must be positive")
    shape = (len(runs), epochs, epochs)
    np_stop = np.zeros(shape)
    loss_stop = np.zeros(shape)
    np_acc = np.zeros(shape)
    loss_acc = np.zeros(shape)
    np_trig = np.zeros(shape, dtype=bool)
    loss_trig = np.zeros(shape, dtype=bool)
    for r, (np_trace, loss_trace, acc_trace) in enumerate(runs):
        _check_axes(np_trace, loss_trace, acc_trace)
        np_trace = MetricTrace(np_trace.steps, np_trace.values, Direction.MAXIMIZE, np_trace.name)
        loss_trace = MetricTrace(loss_trace.steps, loss_trace.values, Direction.MINIMIZE, loss_trace.name)
        for b in range(epochs):
            for gi in range(epochs):
                cfg = PatienceConfig(patience=gi + 1, burn_in=b)
                for trace, stop, acc, trig in ((np_trace, np_stop, np_acc, np_trig),
                                               (loss_trace, loss_stop, loss_acc, loss_trig)):
                    d = patience_stop(trace, cfg, steps_per_epoch)
                    stop[r, b, gi] = d.step / steps_per_epoch
                    acc[r, b, gi] = acc_trace.value_at(d.step)
                    # a stop on the last evaluation is indistinguishable from finishing
                    trig[r, b, gi] = d.triggered and d.step < trace.final_step
    return StopGridResult(
        epochs=epochs,
        steps_per_epoch=steps_per_epoch,
        np_stop_epoch=np.median(np_stop, axis=0),
        loss_stop_epoch=np.median(loss_stop, axis=0),
        np_accuracy=np.median(np_acc, axis=0),
        loss_accuracy=np.median(loss_acc, axis=0),
        np_triggers=np_trig.sum(axis=0),
        loss_triggers=loss_trig.sum(axis=0),
        runs=len(runs),
    )


def simulate_grid(np_trace: MetricTrace, val_loss_trace: MetricTrace, test_acc_trace: MetricTrace,
                  epochs: int, steps_per_epoch: int = 4) -> StopGridResult:
    return simulate_grid_runs([(np_trace, val_loss_trace, test_acc_trace)], epochs, steps_per_epoch)


QUADRANTS = ("Q1", "Q2", "Q3", "Q4", "boundary")


def quadrant(delta_epoch: float, delta_accuracy: float) -> str:
    """Q2 is earlier and more accurate; anything on an axis is 'boundary'."""
    if delta_epoch == 0 or delta_accuracy == 0:
        return "boundary"
    if delta_accuracy > 0:
        return "Q1" if delta_epoch > 0 else "Q2"
    return "Q4" if delta_epoch > 0 else "Q3"


def _quadrant_counts(de: np.ndarray, da: np.ndarray) -> dict:
    counts = dict.fromkeys(QUADRANTS, 0)
    for x, y in zip(de.ravel().tolist(), da.ravel().tolist()):
        counts[quadrant(x, y)] += 1
    return counts


def summarize(grid: StopGridResult) -> dict:
    de, da = grid.delta_epoch, grid.delta_accuracy
    mask = grid.common_mask()
    return {
        "epochs": grid.epochs,
        "steps_per_epoch": grid.steps_per_epoch,
        "runs": grid.runs,
        "cells": int(de.size),
        "barycentre": [float(de.mean()), float(da.mean())],
        "barycentre_common": [float(de[mask].mean()), float(da[mask].mean())],
        "quadrants": _quadrant_counts(de, da),
        "quadrants_common": _quadrant_counts(de[mask], da[mask]),
        "triggers": {
            "np": grid.np_triggers.tolist(),
            "val_loss": grid.loss_triggers.tolist(),
        },
    }
