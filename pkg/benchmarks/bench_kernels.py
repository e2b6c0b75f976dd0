#!/usr/bin/env python3
"""Benchmark the hot kernels: numba-compiled vs pure-numpy paths.

Shapes mirror the study workloads (training-fold logistic fits and test-fold
AUC evaluations).  Run:

    python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from seqstop import _kernels


def build_paths():
    paths = {"numpy": (_kernels._irls_core, _kernels._midrank_auc_core)}
    try:
        from numba import njit
    except ImportError:
        print("numba not installed; benchmarking the numpy path only")
        return paths
    paths["numba"] = (njit(cache=True)(_kernels._irls_core),
                      njit(cache=True)(_kernels._midrank_auc_core))
    return paths


def logistic_case(n, p, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    eta = X @ rng.normal(size=p) * 0.8
    y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(float)
    Xa = np.concatenate([np.ones((n, 1)), X], axis=1)
    return Xa, y


def time_call(fn, *args, repeats):
    fn(*args)  # warm-up (includes JIT compilation)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()
    paths = build_paths()

    print(f"{'kernel':28s} {'shape':>12s} " +
          " ".join(f"{name:>12s}" for name in paths))
    irls_shapes = [(398, 10), (212, 13), (537, 8), (1651, 29)]
    for n, p in irls_shapes:
        Xa, y = logistic_case(n, p, seed=n * p)
        times = [time_call(fns[0], Xa, y, 1.0, 1e-8, 100, repeats=args.repeats)
                 for fns in paths.values()]
        cells = " ".join(f"{t * 1e3:9.3f} ms" for t in times)
        print(f"{'irls_fit':28s} {f'{n}x{p}':>12s} {cells}")

    auc_sizes = [171, 231, 708]
    for n in auc_sizes:
        rng = np.random.default_rng(n)
        scores = rng.random(n)
        labels = (rng.random(n) < 0.4).astype(float)
        times = [time_call(fns[1], scores, labels, repeats=args.repeats * 10)
                 for fns in paths.values()]
        cells = " ".join(f"{t * 1e6:9.2f} us" for t in times)
        print(f"{'midrank_auc':28s} {str(n):>12s} {cells}")


if __name__ == "__main__":
    main()
