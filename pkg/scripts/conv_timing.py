"""Exact versus approximate convolutional NP: agreement and speed.

    python3 scripts/conv_timing.py --filters 100 --kernel 3 --input 8
"""
import argparse
import time

import numpy as np
from scipy.stats import spearmanr

from neural_persistence.conv import ConvGeometry, conv_np_approx, conv_np_exact


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--filters", type=int, default=100)
    ap.add_argument("--kernel", type=int, default=3)
    ap.add_argument("--input", type=int, default=8)
    ap.add_argument("--pad", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    geo = ConvGeometry(args.input, args.input, args.pad)
    filters = [rng.normal(size=(args.kernel, args.kernel)) for _ in range(args.filters)]
    timings = {}
    values = {}
    for name, fn in (("exact", conv_np_exact), ("approx", conv_np_approx)):
        start = time.perf_counter()
        values[name] = [fn(f, geo) for f in filters]
        timings[name] = (time.perf_counter() - start) / len(filters)
    rho = spearmanr(values["exact"], values["approx"]).statistic
    gap = np.array(values["exact"]) - np.array(values["approx"])
    print(f"{args.kernel}x{args.kernel} filters on {args.input}x{args.input} input, {args.filters} filters")
    print(f"spearman {rho:.3f}, exact - approx gap mean {gap.mean():.3f} sd {gap.std():.3f}")
    print(f"per filter: exact {timings['exact'] * 1e3:.3f} ms, approx {timings['approx'] * 1e6:.1f} us, "
          f"speedup {timings['exact'] / timings['approx']:.0f}x")


if __name__ == "__main__":
    main()
