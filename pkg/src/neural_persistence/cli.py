"""Command line interface: ``neural-persistence <command> ...``.

Exit codes: 0 success, 1 usage error, 2 bad input file, 3 degenerate network.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

from . import io as npio
from .conv import ConvFilter, ConvGeometry, conv_np_approx, conv_np_exact, normalized_conv_np
from .core import EssentialPolicy
from .earlystop import simulate_grid, summarize
from .errors import DegenerateNetwork, InvalidArgument
from .measures import compute_layer_report

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_DEGENERATE = 0, 1, 2, 3

log = logging.getLogger("neural_persistence")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        npio.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_compute(args) -> int:
    snap = npio.load_snapshot(args.snapshot, strict=args.strict or None)
    policy = EssentialPolicy.parse(args.essential)
    gmax = snap.global_max()
    reports = [compute_layer_report(layer, gmax, args.p, policy) for layer in snap.layers]
    mean = sum(r.normalized for r in reports) / len(reports)
    doc = {"step": snap.step, "p": args.p, "essential": policy.value, "global_max": gmax,
           "mean_normalized_neural_persistence": mean}
    if args.per_layer or args.bounds:
        layers = []
        for k, (layer, r) in enumerate(zip(snap.layers, reports)):
            entry = {"index": k, "shape": [layer.out_count, layer.in_count],
                     "neural_persistence": r.neural_persistence,
                     "normalized_neural_persistence": r.normalized}
            if args.bounds:
                entry["theoretical_bounds"] = [r.theoretical.lower, r.theoretical.upper]
                entry["empirical_bounds"] = [r.empirical.lower, r.empirical.upper]
                entry["finite_points"] = r.finite_points
                entry["essential_count"] = r.essential_count
            layers.append(entry)
        doc["layers"] = layers
    _emit(_dump(doc), args.out)
    return EXIT_OK


def _parse_hw(text: str) -> tuple[int, int]:
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError:
        raise UsageError(f"--input must look like HxW, got {text!r}") from None


def cmd_conv(args) -> int:
    try:
        filt = ConvFilter(npio.load_filter(args.filter))
    except InvalidArgument as exc:
        raise npio.FormatError(f"{args.filter}: {exc}") from None
    h, w = _parse_hw(args.input)
    geo = ConvGeometry(h, w, args.pad)
    methods = ["exact", "approx"] if args.method == "both" else [args.method]
    fns = {"exact": conv_np_exact, "approx": conv_np_approx}
    doc = {"filter_shape": list(filt.weights.shape), "input": [h, w], "padding": args.pad,
           "p": args.p, "input_neurons": geo.input_count(), "output_neurons": geo.output_count(filt)}
    for m in methods:
        start = time.perf_counter()
        value = fns[m](filt, geo, args.p)
        elapsed = time.perf_counter() - start
        doc[m] = {"neural_persistence": value,
                  "normalized": normalized_conv_np(filt, geo, args.p, m),
                  "seconds": elapsed}
    _emit(_dump(doc), args.out)
    return EXIT_OK


def _pick(traces: dict, name: str, path: str):
    if name in traces:
        return traces[name]
    if len(traces) == 1:
        return next(iter(traces.values()))
    raise npio.FormatError(f"{path}: no {name!r} metric found")


def cmd_simulate(args) -> int:
    np_trace = _pick(npio.load_traces(args.np), "np_mean_normalized", args.np)
    loss_trace = _pick(npio.load_traces(args.val_loss), "val_loss", args.val_loss)
    acc_trace = _pick(npio.load_traces(args.accuracy), "test_accuracy", args.accuracy)
    grid = simulate_grid(np_trace, loss_trace, acc_trace, args.epochs, args.steps_per_epoch)
    buf = io.StringIO()
    cells = list(grid.cells())
    writer = csv.DictWriter(buf, fieldnames=list(cells[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(cells)
    summary = summarize(grid)
    if args.out:
        out = Path(args.out)
        npio.atomic_write_text(out / "grid.csv", buf.getvalue())
        npio.atomic_write_text(out / "summary.json", _dump(summary))
        sys.stdout.write(_dump({"barycentre": summary["barycentre"], "out": str(out)}))
    else:
        sys.stdout.write(_dump(summary))
    return EXIT_OK


def cmd_train(args) -> int:
    from .trainer import MlpSpec, TrainConfig, make_dataset, train

    arch = [int(x) for x in args.arch.split(",") if x.strip()] if args.arch else []
    ds = make_dataset(args.preset, seed=args.seed, **_preset_kwargs(args))
    spec = MlpSpec((ds.n_features, *arch, max(ds.n_classes, 2)))
    cfg = TrainConfig(learning_rate=args.eta, epochs=args.epochs, batch_size=args.batch_size,
                      seed=args.seed, init=args.init, optimizer=args.optimizer)
    result = train(spec, ds, cfg)
    out = Path(args.out)
    for snap in result.snapshots:
        npio.save_snapshot(snap, out / f"snapshot_{snap.step:05d}.json")
    npio.save_traces(result.traces, out / "traces.csv")
    info = {"layer_sizes": list(spec.layer_sizes), "snapshots": len(result.snapshots),
            "diverged": result.diverged,
            "final": {name: float(t.values[-1]) for name, t in result.traces.items()}}
    npio.atomic_write_text(out / "run.json", _dump(info))
    sys.stdout.write(_dump(info))
    return EXIT_OK


def _preset_kwargs(args) -> dict:
    return {"n_features": args.features} if args.preset == "blobs" and args.features else {}


def cmd_regimes(args) -> int:
    from .experiments import regime_experiment

    samples = regime_experiment(runs=args.runs, seed=args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "run", "neural_persistence", "lower_bound", "upper_bound"])
    summary = {}
    for label, s in samples.items():
        for r, (v, lo, up) in enumerate(zip(s.neural_persistence, s.lower_bound, s.upper_bound)):
            w.writerow([label, r, repr(v), repr(lo), repr(up)])
        q1, med, q3 = s.quartiles()
        summary[label] = {"q1": q1, "median": med, "q3": q3}
    out = Path(args.out)
    npio.atomic_write_text(out / "regimes.csv", buf.getvalue())
    npio.atomic_write_text(out / "regimes_summary.json", _dump(summary))
    sys.stdout.write(_dump(summary))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="neural-persistence", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="neural persistence of a snapshot file")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--essential", choices=["skip", "zero"], default="skip")
    p.add_argument("--per-layer", action="store_true")
    p.add_argument("--bounds", action="store_true")
    p.add_argument("--strict", action="store_true", help="require consecutive layers to chain")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("conv", help="neural persistence of one convolutional filter")
    p.add_argument("--filter", required=True)
    p.add_argument("--input", required=True, help="input map size, e.g. 28x28")
    p.add_argument("--pad", type=int, default=0)
    p.add_argument("--method", choices=["exact", "approx", "both"], default="both")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_conv)

    p = sub.add_parser("simulate", help="compare NP and validation-loss early stopping")
    p.add_argument("--np", required=True)
    p.add_argument("--val-loss", required=True)
    p.add_argument("--accuracy", required=True)
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--steps-per-epoch", type=int, default=4)
    p.add_argument("--out", help="directory for grid.csv and summary.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train a small MLP on a synthetic dataset")
    p.add_argument("--preset", choices=["blobs", "rings", "xor"], default="blobs")
    p.add_argument("--arch", default="20,20,20", help="hidden layer sizes")
    p.add_argument("--features", type=int, default=None)
    p.add_argument("--init", default="xavier")
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--optimizer", choices=["sgd", "adam"], default="sgd")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("regimes", help="NP of trained, diverging and random perceptrons")
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_regimes)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DegenerateNetwork as exc:
        print(f"error: degenerate network: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except npio.FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (UsageError, InvalidArgument) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
