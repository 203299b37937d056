"""NP of trained, diverging and random perceptrons over many runs.

    python3 scripts/regime_experiment.py --runs 50 --out results/regimes.csv
"""
import argparse
import csv
import sys

from neural_persistence.experiments import regime_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eta", type=float, default=0.5)
    ap.add_argument("--diverge-eta", type=float, default=50.0)
    ap.add_argument("--out", help="optional per-run CSV")
    args = ap.parse_args(argv)

    samples = regime_experiment(runs=args.runs, seed=args.seed, eta=args.eta, diverge_eta=args.diverge_eta)
    print(f"{'label':<16} {'q1':>7} {'median':>7} {'q3':>7} {'min NP - lower':>15}")
    for label, s in samples.items():
        q1, med, q3 = s.quartiles()
        slack = min(v - lo for v, lo in zip(s.neural_persistence, s.lower_bound))
        print(f"{label:<16} {q1:7.3f} {med:7.3f} {q3:7.3f} {slack:15.3e}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "run", "neural_persistence", "lower_bound", "upper_bound"])
            for label, s in samples.items():
                for r, row in enumerate(zip(s.neural_persistence, s.lower_bound, s.upper_bound)):
                    w.writerow([label, r, *row])


if __name__ == "__main__":
    sys.exit(main())
