"""Train several runs and compare NP-based against validation-loss early stopping.

    python3 scripts/early_stopping_grid.py --runs 10 --epochs 12 --out results/grid.json
"""
import argparse
import json

from neural_persistence.earlystop import simulate_grid_runs, summarize
from neural_persistence.trainer import MlpSpec, TrainConfig, make_dataset, train


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", choices=["blobs", "rings", "xor"], default="xor")
    ap.add_argument("--hidden", default="20,20")
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--epochs", type=int, default=12)
    ap.add_argument("--eta", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    runs = []
    for r in range(args.runs):
        ds = make_dataset(args.preset, seed=args.seed + r)
        hidden = [int(h) for h in args.hidden.split(",") if h]
        spec = MlpSpec((ds.n_features, *hidden, max(ds.n_classes, 2)))
        result = train(spec, ds, TrainConfig(learning_rate=args.eta, epochs=args.epochs, seed=args.seed + r))
        t = result.traces
        runs.append((t["np_mean_normalized"], t["val_loss"], t["test_accuracy"]))
    summary = summarize(simulate_grid_runs(runs, args.epochs))
    de, da = summary["barycentre"]
    print(f"barycentre: delta epoch {de:+.3f}, delta accuracy {da:+.4f}")
    print("quadrants (all):", summary["quadrants"])
    print("quadrants (common):", summary["quadrants_common"])
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(summary, fh, indent=2)


if __name__ == "__main__":
    main()
