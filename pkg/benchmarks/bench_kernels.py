"""Time the numba and numpy covering-path kernels on the same inputs.

Usage: python benchmarks/bench_kernels.py [--sizes 50,200,400] [--repeat 5]

Both backends are checked to return the same path before timing.
"""

import argparse
import time

import numpy as np

from spherepath import _kernels
from spherepath.augment import RngStream, augment
from spherepath.cost import cost_matrix
from spherepath.generators import gen_spherical_null
from spherepath.path import exact_path, heuristic_path


def _best_time(fn, repeat):
    fn()  # warm-up, includes jit compilation
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cost(n, d, seed=0):
    stream = RngStream(seed)
    return cost_matrix(augment(gen_spherical_null(n, d, stream.child(0)), stream.child(1)))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="50,200,400")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--exact-n", type=int, default=7)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba is not importable; only the numpy backend can run")
        return

    print(f"{'kernel':<10}{'n':>6}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    rows = [("heuristic", int(s), heuristic_path) for s in args.sizes.split(",")]
    rows.append(("exact", args.exact_n, exact_path))
    for name, n, solver in rows:
        cost = _cost(n, args.dim)
        assert solver(cost, backend="numba") == solver(cost, backend="numpy")
        fast = _best_time(lambda: solver(cost, backend="numba"), args.repeat)
        slow = _best_time(lambda: solver(cost, backend="numpy"), args.repeat)
        print(f"{name:<10}{n:>6}{fast * 1e3:>12.3f}{slow * 1e3:>12.3f}{slow / fast:>10.1f}")


if __name__ == "__main__":
    main()
