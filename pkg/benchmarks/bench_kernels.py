"""Time each kernel under numba and under the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Compilation (or cache loading) is excluded: every kernel is called once
before timing.  Reports the best of ``--repeat`` runs and the speed-up.
"""

import argparse
import timeit

import numpy as np

from transduct import kernels, numerics


def cases():
    rng = np.random.default_rng(0)
    x = rng.uniform(0.01, 1e5, 200_000)
    logs = np.log(rng.uniform(size=200_000))
    grid_ll = np.log(rng.uniform(size=(10_000, 101)))
    grid_w = np.full(10_000, -np.log(10_000))
    p = (np.arange(10_000) + 0.5) / 10_000
    r = np.arange(101, dtype=np.float64)
    coef100 = numerics.ln_choose_row(100)
    coef5000 = numerics.ln_choose_row(5000)
    return [
        ("ln_gamma 2e5", "ln_gamma", (x,)),
        ("sum_exp 2e5", "sum_exp", (logs,)),
        ("weighted_logsumexp 1e4x101", "weighted_logsumexp", (grid_ll, grid_w)),
        ("binomial_loglik 1e4x101", "binomial_loglik", (p, 100.0, r, coef100)),
        ("beta_binomial_logpmf n=5000", "beta_binomial_logpmf", (5000, 300.0, 4700.0, coef5000)),
        ("sequential_logpmf n=500", "sequential_logpmf", (500, 6.0, 94.0)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"{'kernel':<32}{'numba (ms)':>12}{'numpy (ms)':>12}{'speed-up':>10}")
    for label, name, call_args in cases():
        fast = kernels.numba_impl(name)
        slow = kernels.numpy_impl(name)
        fast(*call_args)
        slow(*call_args)
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        print(f"{label:<32}{t_fast * 1e3:>12.2f}{t_slow * 1e3:>12.2f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
