"""Snapshot (JSON) and trace (delimited text) file formats.

Snapshot files look like::

    {"format": "np-snapshot-v1", "step": 4,
     "layers": [{"rows": 2, "cols": 2, "values": [1.0, 0.5, 0.5, 0.5]},
                {"rows": 4, "cols": 9, "entries": [[0, 0, 4.0], ...]}]}

Trace files have a mandatory header ``step,metric,value``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import NetworkSnapshot, WeightedBipartiteLayer
from .earlystop import MetricTrace
from .errors import InvalidArgument, NeuralPersistenceError

SNAPSHOT_FORMAT = "np-snapshot-v1"
TRACE_HEADER = ("step", "metric", "value")
TRACE_METRICS = ("np_mean_normalized", "val_loss", "test_accuracy", "train_loss", "weight_pnorm",
                 "val_accuracy")


class FormatError(NeuralPersistenceError):
    """Input file does not follow the expected format."""


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _reject_constant(name):
    raise ValueError(f"non-finite value {name} is not allowed")


def _layer_to_json(layer: WeightedBipartiteLayer) -> dict:
    if layer.sparse:
        entries = [[r, c, v] for r, c, v in zip(layer.rows.tolist(), layer.cols.tolist(),
                                                layer.values.tolist())]
        return {"rows": layer.out_count, "cols": layer.in_count, "entries": entries}
    return {"rows": layer.out_count, "cols": layer.in_count,
            "values": layer.to_dense().ravel().tolist()}


def snapshot_to_json(snapshot: NetworkSnapshot) -> str:
    doc = {"format": SNAPSHOT_FORMAT, "step": snapshot.step}
    if snapshot.meta:
        doc["meta"] = snapshot.meta
    doc["layers"] = [_layer_to_json(layer) for layer in snapshot.layers]
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(doc, allow_nan=False) + "\n"


def save_snapshot(snapshot: NetworkSnapshot, path) -> None:
    atomic_write_text(path, snapshot_to_json(snapshot))


def _layer_from_json(obj, k: int, where: str) -> WeightedBipartiteLayer:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: layer {k} must be an object")
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
    except (KeyError, TypeError, ValueError):
        raise FormatError(f"{where}: layer {k} needs integer 'rows' and 'cols'") from None
    if rows < 1 or cols < 1:
        raise FormatError(f"{where}: layer {k} has non-positive dimensions {rows}x{cols}")
    try:
        if "entries" in obj:
            entries = obj["entries"]
            if not entries or any(len(e) != 3 for e in entries):
                raise FormatError(f"{where}: layer {k} entries must be non-empty [row, col, weight] triplets")
            r = np.array([int(e[0]) for e in entries])
            c = np.array([int(e[1]) for e in entries])
            v = np.array([float(e[2]) for e in entries])
            if not np.all(np.isfinite(v)):
                raise FormatError(f"{where}: layer {k} contains non-finite weights")
            return WeightedBipartiteLayer.from_triplets(rows, cols, r, c, v)
        values = obj["values"]
    except KeyError:
        raise FormatError(f"{where}: layer {k} needs 'values' or 'entries'") from None
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: layer {k}: {exc}") from None
    except InvalidArgument as exc:
        raise FormatError(f"{where}: layer {k}: {exc}") from None
    if not isinstance(values, list):
        raise FormatError(f"{where}: layer {k} 'values' must be a list")
    if len(values) != rows * cols:
        raise FormatError(
            f"{where}: layer {k} dimension mismatch: {rows}x{cols} needs {rows * cols} values, "
            f"got {len(values)}")
    try:
        arr = np.array(values, dtype=np.float64)
    except (TypeError, ValueError):
        raise FormatError(f"{where}: layer {k} has non-numeric values") from None
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{where}: layer {k} contains non-finite weights")
    return WeightedBipartiteLayer.dense(arr.reshape(rows, cols))


def snapshot_from_json(text: str, where: str = "<string>", strict: bool | None = None) -> NetworkSnapshot:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{where}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{where}: top level must be an object")
    if doc.get("format") != SNAPSHOT_FORMAT:
        raise FormatError(f"{where}: expected format {SNAPSHOT_FORMAT!r}, got {doc.get('format')!r}")
    layers_doc = doc.get("layers")
    if not isinstance(layers_doc, list) or not layers_doc:
        raise FormatError(f"{where}: 'layers' must be a non-empty list")
    layers = tuple(_layer_from_json(obj, k, where) for k, obj in enumerate(layers_doc))
    if strict is None:
        strict = bool(doc.get("strict", False))
    if strict:
        for k in range(1, len(layers)):
            if layers[k].in_count != layers[k - 1].out_count:
                raise FormatError(
                    f"{where}: layer {k} has {layers[k].in_count} inputs but layer {k - 1} "
                    f"has {layers[k - 1].out_count} outputs")
    step = doc.get("step", 0)
    if not isinstance(step, int):
        raise FormatError(f"{where}: 'step' must be an integer")
    meta = doc.get("meta", {})
    return NetworkSnapshot(layers, step, dict(meta) if isinstance(meta, dict) else {})


def load_snapshot(path, strict: bool | None = None) -> NetworkSnapshot:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: cannot read: {exc.strerror}") from None
    return snapshot_from_json(text, str(path), strict)


def load_matrix(path, delimiter: str | None = None) -> WeightedBipartiteLayer:
    """Dense layer from a delimiter-separated matrix (one output row per line)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if delimiter is None:
        delimiter = _sniff(text)
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split() if delimiter == " " else line.split(delimiter)
        try:
            rows.append([float(x) for x in parts])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-numeric entry") from None
        if not all(math.isfinite(x) for x in rows[-1]):
            raise FormatError(f"{path}:{lineno}: non-finite entry")
        if len(rows[-1]) != len(rows[0]):
            raise FormatError(f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(rows[-1])}")
    if not rows:
        raise FormatError(f"{path}: empty matrix")
    return WeightedBipartiteLayer.dense(rows)


def load_filter(path) -> np.ndarray:
    """Filter weights from JSON (nested list or ``{"weights": ...}``) or a delimited matrix."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith(("[", "{")):
        try:
            doc = json.loads(text, parse_constant=_reject_constant)
        except (json.JSONDecodeError, ValueError) as exc:
            raise FormatError(f"{path}: {exc}") from None
        if isinstance(doc, dict):
            doc = doc.get("weights")
        try:
            arr = np.array(doc, dtype=np.float64)
        except (TypeError, ValueError):
            raise FormatError(f"{path}: filter must be a rectangular numeric matrix") from None
        if arr.ndim != 2:
            raise FormatError(f"{path}: filter must be 2-d")
        return arr
    return load_matrix(path).to_dense()


def _sniff(text: str) -> str:
    lines = (ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#"))
    head = next(lines, "")
    for d in (",", "\t", ";"):
        if d in head:
            return d
    return " "


def traces_to_csv(traces) -> str:
    """Serialize traces (a mapping or iterable of `MetricTrace`) with a header row."""
    if isinstance(traces, dict):
        traces = traces.values()
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for trace in traces:
        for step, value in zip(trace.steps.tolist(), trace.values.tolist()):
            w.writerow([step, trace.name, repr(float(value))])
    return buf.getvalue()


def save_traces(traces, path) -> None:
    atomic_write_text(path, traces_to_csv(traces))


def traces_from_csv(text: str, where: str = "<string>", delimiter: str | None = None) -> dict:
    from .trainer import TRACE_DIRECTIONS

    if delimiter is None:
        delimiter = _sniff(text)
    reader = csv.reader(_io.StringIO(text), delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError(f"{where}: empty trace file") from None
    if tuple(h.strip().lower() for h in header) != TRACE_HEADER:
        raise FormatError(f"{where}:1: header must be {','.join(TRACE_HEADER)}, got {header!r}")
    rows: dict[str, list] = {}
    for lineno, row in enumerate(reader, 2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 3:
            raise FormatError(f"{where}:{lineno}: expected 3 fields, got {len(row)}")
        step_s, name, value_s = (x.strip() for x in row)
        if name not in TRACE_METRICS:
            raise FormatError(f"{where}:{lineno}: unknown metric {name!r}")
        try:
            step, value = int(step_s), float(value_s)
        except ValueError:
            raise FormatError(f"{where}:{lineno}: bad step or value") from None
        if not math.isfinite(value):
            raise FormatError(f"{where}:{lineno}: non-finite value")
        series = rows.setdefault(name, [])
        if series and step <= series[-1][0]:
            raise FormatError(f"{where}:{lineno}: step {step} for {name!r} does not increase")
        series.append((step, value))
    return {name: MetricTrace(np.array([s for s, _ in series], dtype=np.int64),
                              np.array([v for _, v in series]), TRACE_DIRECTIONS[name], name)
            for name, series in rows.items()}


def load_traces(path, delimiter: str | None = None) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: cannot read: {exc.strerror}") from None
    return traces_from_csv(text, str(path), delimiter)
