"""Compare the numba and pure-numpy coverage kernels.

Times the raw union-value kernel on batches of random action sets and a
full protocol run on each backend. The numpy path is what you get with
RESCOVER_NO_NUMBA=1; this script calls both explicitly so one process can
measure the pair side by side.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from rescover.environment import build_actions, coverage_objective, generate_field, random_poses
from rescover.harness import random_instance
from rescover.kernels import HAVE_NUMBA
from rescover.protocol import run_distributed


def bench_evaluate(n_robots, n_evals, seed=0):
    rng = np.random.default_rng(seed)
    field = generate_field(200, 200, rng)
    poses = random_poses(n_robots, rng)
    actions = build_actions(poses, 10.0, 10.0, field)
    n_actions = 4 * n_robots
    batches = [
        np.sort(rng.choice(n_actions, size=int(rng.integers(1, n_robots + 1)), replace=False))
        for _ in range(n_evals)
    ]
    rows = []
    for backend, use_numba in (("numba", True), ("numpy", False)):
        if use_numba and not HAVE_NUMBA:
            continue
        f = coverage_objective(field, actions, use_numba=use_numba)
        f.evaluate(batches[0])  # jit warmup / first-touch
        f._cache.clear()
        t0 = time.perf_counter()
        for ids in batches:
            f.evaluate(ids)
            f._cache.clear()  # force kernel work, not dict lookups
        dt = time.perf_counter() - t0
        rows.append((backend, dt, n_evals / dt))
    return rows


def bench_protocol(n_robots, k, seed=3):
    rows = []
    for backend, use_numba in (("numba", True), ("numpy", False)):
        if use_numba and not HAVE_NUMBA:
            continue
        rng = np.random.default_rng(seed)
        inst = random_instance(n_robots, rng, max_actions=4, field_size=128, edge_probability=0.3)
        inst.f._use_numba = use_numba
        inst.f._cache.clear()
        t0 = time.perf_counter()
        run = run_distributed(inst.f, inst.action_sets, inst.graph, k)
        dt = time.perf_counter() - t0
        rows.append((backend, dt, run.total_rounds))
    return rows


def main():
    if not HAVE_NUMBA:
        print("numba not importable; only the numpy path will be timed")

    print("== union-value kernel, 200x200 field, uncached evaluations ==")
    for n_robots, n_evals in ((5, 4000), (30, 2000), (50, 1000)):
        print(f"-- {n_robots} robots, sets up to {n_robots} actions, {n_evals} evals")
        for backend, dt, rate in bench_evaluate(n_robots, n_evals):
            print(f"   {backend:6s} {dt:7.3f}s  {rate:9.0f} evals/s")

    print("== full distributed run (shared evaluation cache) ==")
    for n_robots, k in ((20, 10), (40, 25)):
        print(f"-- {n_robots} robots, {k} anticipated attacks")
        for backend, dt, rounds in bench_protocol(n_robots, k):
            print(f"   {backend:6s} {dt:7.3f}s  ({rounds} rounds)")


if __name__ == "__main__":
    main()
