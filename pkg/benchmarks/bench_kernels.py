"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--rows N] [--repeat R]

Each kernel runs on the same synthetic input under every available backend;
the table reports the best of R wall-clock timings and the speedup of the
compiled backend over the fallback.
"""
import argparse
import random
import sys
import timeit

import numpy as np

from kgtk.kernels import implementations

LABELS = ["P31", "P279", "P106", "P463", "P17", "P131", "P21", "P27"]
CELLS = ["Q42", '"a string"', "'chat'@fr", "-1.2e+2[-1.0,+1.0]kg.m/s2", "@043.26193/010.92708",
         "^1839-00-00T00:00:00Z/9", "True", "Q1|Q2", "12.5", "bad cell"]


def workloads(n, seed=1):
    rng = random.Random(seed)
    lines = [f"Q{rng.randrange(10**6)}\t{rng.choice(LABELS)}\tQ{rng.randrange(10**5)}\n" for _ in range(n)]
    cells = [rng.choice(CELLS) for _ in range(n)]
    words = [rng.choice(["saint", "david", "wales", "bishop", "human", "priest"]) for _ in range(n)]
    nodes = max(2, n // 4)
    src = np.array([rng.randrange(nodes) for _ in range(n)], dtype=np.int64)
    dst = np.array([rng.randrange(nodes) for _ in range(n)], dtype=np.int64)
    order = np.argsort(src, kind="stable")
    indptr = np.zeros(nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=nodes), out=indptr[1:])
    indices = dst[order]
    roots = list(range(0, nodes, max(1, nodes // 20)))[:20]
    return {
        "split_lines": lambda k: k.split_lines(lines),
        "join_rows": (lambda rows: lambda k: k.join_rows(rows))([l.rstrip("\n").split("\t") for l in lines]),
        "filter_rows": (lambda rows: lambda k: k.filter_rows(rows, 0, 1, 2, None, {"P31"}, None))(
            [l.rstrip("\n").split("\t") for l in lines]),
        "value_kind": lambda k: [k.value_kind(c) for c in cells],
        "hash_tokens": lambda k: k.hash_tokens(words, 64, 0x84222325CBF29CE4),
        "union_find": lambda k: k.union_find(nodes, src, dst),
        "reach_many": lambda k: k.reach_many(indptr, indices, nodes, roots),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    impls = implementations()
    if "cython" not in impls:
        print("compiled backend not built; only the fallback is timed", file=sys.stderr)
    names = sorted(impls, reverse=True)   # python, cython
    print(f"{'kernel':<14}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")
    for kernel, fn in workloads(args.rows).items():
        times = {}
        for name in names:
            mod = impls[name]
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        speed = times["python"] / times["cython"] if "cython" in times and times["cython"] else float("nan")
        print(f"{kernel:<14}" + "".join(f"{times[n] * 1000:>10.1f}ms" for n in names) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
