"""Compiled vs pure-Python kernel timings on indicator instances and core checks.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

from treecsp import consistency
from treecsp.conditions import builtin
from treecsp.cores import is_core_tree
from treecsp.digraph import Digraph
from treecsp.generation import generate_core_trees
from treecsp.indicator import FULL, LEVELWISE, build_indicator

TREE_C = Digraph.from_edges([(0, 1), (0, 9), (2, 1), (3, 2), (4, 3), (5, 0), (5, 6), (6, 7), (7, 8),
                             (10, 9), (10, 12), (11, 10), (12, 13), (14, 0), (14, 15), (15, 16),
                             (18, 17), (17, 15)])
TREE_D = Digraph.from_edges([(1, 2), (1, 0), (2, 3), (3, 4), (4, 5), (0, 6), (7, 6), (7, 8), (10, 7),
                             (8, 9), (11, 0), (11, 13), (12, 11), (13, 14), (14, 15)])

CASES = [
    ("C majority full", TREE_C, "majority", FULL),
    ("C kmm levelwise", TREE_C, "kmm", LEVELWISE),
    ("D kk-5 full", TREE_D, "kk-5", FULL),
    ("D hmck-2 full", TREE_D, "hmck-2", FULL),
    ("D jonsson-20 levelwise", TREE_D, "jonsson-20", LEVELWISE),
]


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--core-size", type=int, default=12)
    args = ap.parse_args()
    if not consistency.compiled_available():
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")

    rows = []
    for label, h, name, mode in CASES:
        inst = build_indicator(h, builtin(name), mode)
        times = {}
        for b in ("compiled", "python"):
            consistency.use_backend(b)
            times[b] = _best(lambda: inst.solve(), args.repeat)
        rows.append((f"{label} ({inst.n_classes} classes)", times))

    trees = list(generate_core_trees(args.core_size))
    times = {}
    for b in ("compiled", "python"):
        consistency.use_backend(b)
        times[b] = _best(lambda: [is_core_tree(t) for t in trees], args.repeat)
    rows.append((f"core check, {len(trees)} trees n={args.core_size}", times))
    consistency.use_backend("compiled")

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'compiled':>10}  {'python':>10}  {'speedup':>8}")
    for label, t in rows:
        print(f"{label:<{width}}  {t['compiled'] * 1e3:>8.2f}ms  {t['python'] * 1e3:>8.2f}ms"
              f"  {t['python'] / t['compiled']:>7.1f}x")


if __name__ == "__main__":
    main()
