"""Mean normalized NP of untrained networks under different initializations.

    python3 scripts/init_contrast.py --sizes 20,20,20 --seeds 20
"""
import argparse

from neural_persistence.experiments import init_contrast


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="20,20,20", help="layer sizes, input first")
    ap.add_argument("--schemes", default="beta(0.005,0.5);xavier;xavier_uniform;gaussian(1);uniform(-1,1)",
                    help="semicolon-separated init schemes")
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args(argv)

    sizes = tuple(int(s) for s in args.sizes.split(","))
    out = init_contrast(sizes, tuple(args.schemes.split(";")), args.seeds)
    for scheme, stats in out.items():
        print(f"{scheme:<18} {stats['mean']:.3f} +- {stats['std']:.3f}")


if __name__ == "__main__":
    main()
