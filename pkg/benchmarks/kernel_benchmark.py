"""Benchmark the compiled triplet-gradient kernel against the numpy fallback.

Usage:
    python3 benchmarks/kernel_benchmark.py [--repeats 50]

Times triplet_linear_grad on a grid of batch shapes and reports the speedup
of the compiled extension over the pure-numpy reference, after verifying
that both backends return identical results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from adrank.kernels import backend_name, numpy_backend

try:
    from adrank.kernels import _ckern
except ImportError:
    _ckern = None


def make_problem(rng, batch, d_emb, d_in, negs_per_sample):
    W = rng.normal(size=(d_emb, d_in))
    C = rng.normal(size=(batch, d_in))
    P = rng.normal(size=(batch, d_emb))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    negs = rng.normal(size=(batch * negs_per_sample, d_emb))
    negs /= np.linalg.norm(negs, axis=1, keepdims=True)
    offsets = np.arange(batch + 1, dtype=np.int64) * negs_per_sample
    return W, C, P, negs, offsets


def bench(fn, args, repeats):
    fn(*args)  # warm-up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    if _ckern is None:
        print("compiled kernel unavailable; only the numpy backend can run")
        return

    rng = np.random.default_rng(0)
    shapes = [
        (16, 16, 20, 15),
        (64, 64, 128, 31),
        (128, 128, 256, 63),
        (256, 300, 500, 127),
    ]
    print(f"{'batch':>6} {'d_emb':>6} {'d_in':>6} {'negs':>5} "
          f"{'numpy (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for batch, d_emb, d_in, negs_per in shapes:
        problem = make_problem(rng, batch, d_emb, d_in, negs_per)
        beta = 0.2
        ln, gwn, gcn = numpy_backend.triplet_linear_grad(*problem, beta)
        lc, gwc, gcc = _ckern.triplet_linear_grad(*problem, beta)
        assert abs(ln - lc) <= 1e-12 * max(1.0, abs(ln))
        assert np.allclose(gwn, gwc, atol=1e-12) and np.allclose(gcn, gcc, atol=1e-12)
        t_np = bench(numpy_backend.triplet_linear_grad, (*problem, beta), args.repeats)
        t_cy = bench(_ckern.triplet_linear_grad, (*problem, beta), args.repeats)
        print(f"{batch:>6} {d_emb:>6} {d_in:>6} {negs_per:>5} "
              f"{t_np * 1e3:>12.3f} {t_cy * 1e3:>12.3f} {t_np / t_cy:>7.2f}x")
    print(f"\nactive backend in normal use: {backend_name()}")


if __name__ == "__main__":
    main()
