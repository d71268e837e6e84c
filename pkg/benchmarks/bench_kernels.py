#!/usr/bin/env python3
"""Benchmark the hot kernels: numba @njit loops vs the vectorized numpy path.

Usage:
    python3 benchmarks/bench_kernels.py [--samples N] [--dim D] [--repeats R]

Run with TALKMOVES_NO_NUMBA=1 to confirm the fallback is what you are
actually shipping on machines without numba.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from talkmoves.classifier import kernels


def make_data(rng, samples, dim, nnz_per_row):
    counts = rng.integers(nnz_per_row // 2, nnz_per_row * 2, size=samples)
    offsets = np.zeros(samples + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(counts)
    indices = rng.integers(0, dim, size=offsets[-1]).astype(np.int64)
    values = rng.uniform(0.2, 2.0, size=offsets[-1])
    labels = rng.integers(0, 7, size=samples).astype(np.int64)
    sample_w = np.ones(samples)
    order = rng.permutation(samples).astype(np.int64)
    return indices, values, offsets, labels, sample_w, order


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=20000)
    parser.add_argument("--dim", type=int, default=1 << 15)
    parser.add_argument("--nnz", type=int, default=24)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    indices, values, offsets, labels, sample_w, order = make_data(
        rng, args.samples, args.dim, args.nnz
    )
    weights = rng.normal(scale=0.1, size=(7, args.dim))
    bias = np.zeros(7)

    paths = [("numpy", kernels._csr_logits_np, kernels._epoch_sgd_np)]
    if kernels.USE_NUMBA:
        # warm the JIT outside the timed region
        kernels.csr_logits(indices[:64], values[:64], offsets[:3], weights, bias)
        kernels.epoch_sgd(
            indices, values, offsets, labels, sample_w, order,
            weights.copy(), bias.copy(), 0.1, 0.0, 64,
        )
        paths.insert(0, ("numba", kernels.csr_logits, kernels.epoch_sgd))
    else:
        print("numba disabled (TALKMOVES_NO_NUMBA or import failure); numpy only\n")

    print(f"samples={args.samples} dim={args.dim} nnz/row~{args.nnz} repeats={args.repeats}")
    print(f"{'path':8} {'csr_logits':>12} {'epoch_sgd':>12} {'rows/s (sgd)':>14}")
    results = {}
    for name, logits_fn, sgd_fn in paths:
        t_logits = timeit(lambda: logits_fn(indices, values, offsets, weights, bias), args.repeats)

        def run_epoch():
            w = np.zeros((7, args.dim))
            b = np.zeros(7)
            sgd_fn(indices, values, offsets, labels, sample_w, order, w, b, 0.3, 0.0, 32)

        t_sgd = timeit(run_epoch, args.repeats)
        results[name] = (t_logits, t_sgd)
        print(f"{name:8} {t_logits * 1e3:>10.2f}ms {t_sgd * 1e3:>10.2f}ms {args.samples / t_sgd:>14.0f}")

    if "numba" in results and "numpy" in results:
        speedup_logits = results["numpy"][0] / results["numba"][0]
        speedup_sgd = results["numpy"][1] / results["numba"][1]
        print(f"\nnumba speedup: csr_logits x{speedup_logits:.1f}, epoch_sgd x{speedup_sgd:.1f}")


if __name__ == "__main__":
    main()
