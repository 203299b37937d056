"""Spread of final mean normalized NP across runs for networks of growing depth.

    python3 scripts/depth_variability.py --depths 1,2,3 --runs 20
"""
import argparse

from neural_persistence.experiments import depth_variability


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depths", default="1,2,3")
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=15)
    ap.add_argument("--lr", type=float, default=3e-4)
    ap.add_argument("--optimizer", choices=["sgd", "adam"], default="adam")
    args = ap.parse_args(argv)

    depths = tuple(int(d) for d in args.depths.split(","))
    out = depth_variability(depths, runs=args.runs, seed=args.seed, epochs=args.epochs,
                            learning_rate=args.lr, optimizer=args.optimizer)
    print(f"{'depth':>5} {'mean':>7} {'iqr':>7}")
    for depth, stats in out.items():
        print(f"{depth:>5} {stats['mean']:7.3f} {stats['iqr']:7.3f}")


if __name__ == "__main__":
    main()
