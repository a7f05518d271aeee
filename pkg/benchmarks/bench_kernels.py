"""Compiled vs numpy kernels on identical inputs.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from gevreylab.kernels import backends


def inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    a, b, c = rng.uniform(-50, 50, (3, n))
    sigma = rng.uniform(1e-6, 5, n)
    theta = rng.random(n)
    x1, x2, y1, y2 = rng.standard_cauchy((4, n))
    return a, b, c, sigma, theta, x1, x2, y1, y2


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    a, b, c, sigma, theta, x1, x2, y1, y2 = inputs(args.n)
    mix = np.full(4, 0.25)
    cases = {
        "exp_lemma_scan": lambda k: k.exp_lemma_scan(a, b, c, sigma, theta),
        "ximed_scan": lambda k: k.ximed_scan(a, b, c, 12.0),
        "bracket_scan": lambda k: k.bracket_scan(a, b, c),
        "kernel_weights": lambda k: k.kernel_weights(0.0, 0.0, -0.2, 0.6, -0.1, 1.0, 1.0, 1.1,
                                                     mix, x1, x2, y1, y2),
    }
    impls = backends()
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<16}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for name, fn in cases.items():
        times = {}
        for bname, mod in impls.items():
            times[bname] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = "".join(f"{times[b] * 1e3:>10.1f}ms" for b in impls)
        sp = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<16}{row}{sp:>9.2f}x")


if __name__ == "__main__":
    main()
