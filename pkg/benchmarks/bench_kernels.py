#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Usage:
    python3 benchmarks/bench_kernels.py [--lmax 32 64 100] [--points 1024] [--repeat 5]
    python3 benchmarks/bench_kernels.py --dataset 100 --threads 1 4

Reports the best-of-``repeat`` wall time for the two projection searches and
the analysis/synthesis pair at each bandlimit, and optionally the LPF2
dataset throughput at several thread counts.  Both backends run in the same
process; the first call of each numba kernel (compilation) is excluded.
"""
import argparse
import os
import tempfile
import time
from pathlib import Path

import numpy as np

from lpfdefense import _accel, kernels, synthetic
from lpfdefense.cloud import center, unit_directions
from lpfdefense.cloudio import save_cloud
from lpfdefense.dataset import LPF2, DefenseDatasetJob, make_defense_dataset
from lpfdefense.lpf import FilterSpec
from lpfdefense.projection import build_grid
from lpfdefense.sht import SHCoefficients


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(L, n_points):
    g = build_grid(L)
    cloud, _ = center(synthetic.blob(n_points, seed=0))
    dirs, r = unit_directions(cloud.points)
    valid = r > 0
    c = SHCoefficients(L, np.random.default_rng(0).normal(size=(L + 1) ** 2))
    ccos, csin = c.to_cos_sin()
    acos, asin = np.random.default_rng(1).normal(size=(2, g.n_lat, L + 1))
    cases = {}
    for name in ("numba", "numpy") if _accel.HAVE_NUMBA else ("numpy",):
        npn = getattr(kernels, f"nearest_point_per_node_{name}")
        nnp = getattr(kernels, f"nearest_node_per_point_{name}")
        ana = getattr(kernels, f"analysis_{name}")
        syn = getattr(kernels, f"synthesis_{name}")
        cases[name] = {
            "node->point": lambda f=npn: f(g.theta, g.phi, dirs, valid),
            "point->node": lambda f=nnp: f(dirs, g.theta, g.phi),
            "sht pair": lambda a=ana, s=syn: (a(acos, asin, g.theta, L), s(ccos, csin, g.theta, L)),
        }
    return cases


def bench_kernels(lmaxes, n_points, repeat):
    print(f"kernels: {n_points} points, best of {repeat} (ms)")
    print(f"{'L':>5} {'kernel':<12} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for L in lmaxes:
        cases = kernel_cases(L, n_points)
        for kernel in ("node->point", "point->node", "sht pair"):
            t = {name: best_of(cases[name][kernel], repeat) for name in cases}
            nb = t.get("numba", float("nan"))
            sp = t["numpy"] / nb if "numba" in t else float("nan")
            print(f"{L:>5} {kernel:<12} {nb * 1e3:>10.2f} {t['numpy'] * 1e3:>10.2f} {sp:>7.1f}x")


def bench_dataset(n_files, thread_counts, L):
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        names = sorted(synthetic.SHAPES)
        for i in range(n_files):
            d = root / "in" / names[i % len(names)]
            d.mkdir(parents=True, exist_ok=True)
            save_cloud(synthetic.SHAPES[names[i % len(names)]](1024, seed=i), d / f"{i:04d}.pclb")
        job = DefenseDatasetJob(str(root / "in"), str(root / "out"), mode=LPF2,
                                filter=FilterSpec.gaussian(20), bandlimit=L, n_target=1024, seed=0)
        make_defense_dataset(job, threads=1, files=None)  # warm-up
        base = None
        print(f"\ndataset: LPF2, {n_files} clouds x 1024 points, L={L}, {os.cpu_count()} cpu(s)")
        for t in thread_counts:
            t0 = time.perf_counter()
            make_defense_dataset(job, threads=t)
            wall = time.perf_counter() - t0
            base = base or wall
            print(f"  threads={t:<3} {wall:7.2f} s   ({wall / base:.2f}x of 1-thread)")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lmax", type=int, nargs="+", default=[32, 64, 100])
    p.add_argument("--points", type=int, default=1024)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--dataset", type=int, default=0, help="also time an LPF2 job over this many clouds")
    p.add_argument("--dataset-lmax", type=int, default=64)
    p.add_argument("--threads", type=int, nargs="+", default=[1, 4])
    args = p.parse_args()
    print(f"numba installed: {_accel.HAVE_NUMBA}; pipeline backend: {_accel.backend_name()}")
    bench_kernels(args.lmax, args.points, args.repeat)
    if args.dataset:
        bench_dataset(args.dataset, args.threads, args.dataset_lmax)


if __name__ == "__main__":
    main()
