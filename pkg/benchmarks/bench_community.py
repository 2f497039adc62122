"""Compare the compiled community-assignment kernel with the NumPy fallback.

Builds random sentence neighborhoods at several sizes, runs the greedy
assignment sweep through both backends, checks they agree label for
label, and prints a timing table.

    python benchmarks/bench_community.py [--sizes 500,2000,8000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mdforge import _community_py
from mdforge.clustering import _neighborhoods

try:
    from mdforge import _community_core
except ImportError:
    _community_core = None


def make_case(n: int, dim: int, seed: int):
    rng = np.random.default_rng(seed)
    emb = rng.standard_normal((n, dim))
    emb /= np.linalg.norm(emb, axis=1, keepdims=True)
    indptr, indices, counts = _neighborhoods(np.ascontiguousarray(emb), 0.1)
    order = np.argsort(-counts, kind="stable").astype(np.int64)
    return indptr, indices, order


def bench(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="500,2000,8000")
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _community_core is None:
        print("compiled backend not built; showing python fallback only")
    print(f"{'n':>8} {'edges':>10} {'python':>12} {'compiled':>12} {'speedup':>8}")
    for n in sizes:
        indptr, indices, order = make_case(n, args.dim, seed=n)
        case = (indptr, indices, order, n)
        t_py = bench(_community_py.greedy_assign, case, args.repeats)
        if _community_core is not None:
            t_c = bench(_community_core.greedy_assign, case, args.repeats)
            same = np.array_equal(
                _community_py.greedy_assign(*case), _community_core.greedy_assign(*case)
            )
            if not same:
                raise SystemExit(f"backend mismatch at n={n}")
            print(
                f"{n:>8} {len(indices):>10} {t_py * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms"
                f" {t_py / t_c:>7.1f}x"
            )
        else:
            print(f"{n:>8} {len(indices):>10} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
