"""Benchmark the compiled kernels against the pure NumPy fallback.

Usage:  python benchmarks/bench_kernels.py [--sizes 200,1000,3000]

Times the three hot kernels on synthetic data with both backends, checks
they agree, and prints a speedup table. The compiled backend must be built
(pip install -e . does this); otherwise only the fallback is reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from protforge.kernels import pure

try:
    from protforge.kernels import _native as native
except ImportError:
    native = None


def synthetic_backbone(n, seed=0):
    rng = np.random.default_rng(seed)
    ca = np.cumsum(rng.normal(scale=2.4, size=(n, 3)), axis=0)
    n_xyz = ca + rng.normal(scale=0.8, size=(n, 3))
    c_xyz = ca + rng.normal(scale=0.8, size=(n, 3))
    o_xyz = c_xyz + rng.normal(scale=0.7, size=(n, 3))
    h_xyz = n_xyz + rng.normal(scale=0.6, size=(n, 3))
    donor = np.ones(n, dtype=np.uint8)
    acceptor = np.ones(n, dtype=np.uint8)
    return n_xyz, h_xyz, c_xyz, o_xyz, donor, acceptor, ca


def timeit(fn, *args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_hbond(sizes):
    rows = []
    for n in sizes:
        args = synthetic_backbone(n)
        t_pure, (idx_p, e_p) = timeit(pure.hbond_best_two, *args)
        if native is None:
            rows.append((f"hbond_best_two n={n}", t_pure, None, True))
            continue
        t_nat, (idx_n, e_n) = timeit(native.hbond_best_two, *args)
        same = bool(np.array_equal(idx_p, idx_n)
                    and np.allclose(e_p, e_n, atol=1e-12))
        rows.append((f"hbond_best_two n={n}", t_pure, t_nat, same))
    return rows


def bench_centroids(sizes):
    rng = np.random.default_rng(1)
    centroids = rng.normal(size=(20, 10))
    rows = []
    for n in sizes:
        points = rng.normal(size=(n * 40, 10))
        t_pure, a_p = timeit(pure.nearest_centroids, points, centroids)
        if native is None:
            rows.append((f"nearest_centroids n={len(points)}", t_pure, None, True))
            continue
        t_nat, a_n = timeit(native.nearest_centroids, points, centroids)
        rows.append((f"nearest_centroids n={len(points)}", t_pure, t_nat,
                     bool(np.array_equal(a_p, a_n))))
    return rows


def bench_neighbors(sizes):
    rng = np.random.default_rng(2)
    rows = []
    for n in sizes:
        ca = np.cumsum(rng.normal(scale=2.4, size=(n, 3)), axis=0)
        t_pure, p_p = timeit(pure.nearest_spatial_neighbors, ca, 2)
        if native is None:
            rows.append((f"nearest_spatial_neighbors n={n}", t_pure, None, True))
            continue
        t_nat, p_n = timeit(native.nearest_spatial_neighbors, ca, 2)
        rows.append((f"nearest_spatial_neighbors n={n}", t_pure, t_nat,
                     bool(np.array_equal(p_p, p_n))))
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="200,1000,3000",
                        help="comma-separated residue counts")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if native is None:
        print("compiled backend not available; timing the fallback only\n")

    rows = bench_hbond(sizes) + bench_centroids(sizes) + bench_neighbors(sizes)

    width = max(len(r[0]) for r in rows)
    header = f"{'kernel':<{width}}  {'pure':>9}  {'native':>9}  {'speedup':>8}  agree"
    print(header)
    print("-" * len(header))
    for name, t_pure, t_nat, same in rows:
        if t_nat is None:
            print(f"{name:<{width}}  {t_pure * 1e3:8.1f}ms  {'-':>9}  {'-':>8}  -")
        else:
            print(f"{name:<{width}}  {t_pure * 1e3:8.1f}ms  {t_nat * 1e3:8.1f}ms"
                  f"  {t_pure / t_nat:7.1f}x  {'yes' if same else 'NO'}")
            if not same:
                raise SystemExit("backend disagreement; investigate before trusting timings")


if __name__ == "__main__":
    main()
