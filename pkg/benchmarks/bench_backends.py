"""Time the compiled core against the numpy fallback.

Usage: python benchmarks/bench_backends.py [--k 100000] [--nnz 50]
"""
import argparse
import time

import numpy as np

from kernlin import _backend, _pycore


def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--k", type=int, default=100_000)
    parser.add_argument("--nnz", type=int, default=50)
    parser.add_argument("--rows", type=int, default=2000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    idx = np.sort(rng.choice(10 * args.nnz, args.nnz, replace=False)).astype(np.int64) + 1
    val = rng.random(args.nnz) + 0.1
    X = rng.random((args.rows, 30))
    y = np.where(X[:, 0] > X[:, 1], 1.0, -1.0)
    indptr = np.arange(0, X.size + 1, 30, dtype=np.int64)
    indices = np.tile(np.arange(30, dtype=np.int64), args.rows)
    qii = (X * X).sum(axis=1)
    order = rng.permutation(args.rows).astype(np.int64)

    cores = [_pycore]
    try:
        cores.append(_backend.load("cython"))
    except ImportError:
        print("compiled core not built; timing the fallback only")
    print(f"{'op':<12}" + "".join(f"{c.NAME:>12}" for c in cores))
    ops = {
        "project": lambda c: c.project(idx, val, 1, args.k, 0),
        "cws": lambda c: c.cws(idx, val, 1, args.k),
        "dcd_sweep": lambda c: c.dcd_sweep(indptr, indices, X.ravel(), y, np.zeros(args.rows),
                                           np.zeros(30), qii, 1.0, order),
    }
    for name, op in ops.items():
        print(f"{name:<12}" + "".join(f"{best_of(lambda: op(c)):>11.3f}s" for c in cores))


if __name__ == "__main__":
    main()
