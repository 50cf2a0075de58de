"""Compare the numba and pure-numpy kernels on the two hot paths.

    python benchmarks/bench_backends.py [--repeat 5] [--replicates 100000]

Both backends are called directly, so the env flag does not matter here.
Outputs are checked for agreement before timing is reported.
"""
import argparse
import time

import numpy as np

from neutral_kimura import kernels
from neutral_kimura._accel import HAVE_NUMBA
from neutral_kimura.wf_oracle import WfConfig, transition_cdf


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_gegenbauer(repeat):
    x = np.linspace(-1.0, 1.0, 20_001)
    args = (1.5, 60, x)
    fast = kernels._gegenbauer_table_numba(*args)  # also triggers compilation
    slow = kernels._gegenbauer_table_numpy(*args)
    np.testing.assert_allclose(fast, slow, rtol=1e-13, atol=1e-300)
    return (best_of(lambda: kernels._gegenbauer_table_numba(*args), repeat),
            best_of(lambda: kernels._gegenbauer_table_numpy(*args), repeat))


def bench_wright_fisher(repeat, replicates):
    cfg = WfConfig(population_size=200, x0=0.3, generations=2000, replicates=replicates, seed=1)
    cdf = transition_cdf(cfg.population_size)
    keys = kernels.replicate_keys(cfg.seed, cfg.replicates)
    args = (cdf, cfg.initial_count, cfg.generations, keys)
    fast = kernels._wf_kernel_numba(*args)
    slow = kernels._wf_kernel_numpy(*args)
    for a, b in zip(fast, slow):
        np.testing.assert_array_equal(a, b)
    return (best_of(lambda: kernels._wf_kernel_numba(*args), repeat),
            best_of(lambda: kernels._wf_kernel_numpy(*args), repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--replicates", type=int, default=100_000)
    args = parser.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; the 'numba' column runs the uncompiled loops")
    rows = [
        ("gegenbauer_table  n<=60, 20001 pts", bench_gegenbauer(args.repeat)),
        (f"wright_fisher     N=200, {args.replicates} reps", bench_wright_fisher(max(1, args.repeat // 2), args.replicates)),
    ]
    print(f"{'kernel':40s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, (fast, slow) in rows:
        print(f"{name:40s} {fast:10.4f} {slow:10.4f} {slow / fast:8.1f}x")


if __name__ == "__main__":
    main()
