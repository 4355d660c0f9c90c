"""Pure-Python kernels. ``_speedups.pyx`` implements the same functions."""
import numpy as np

from .values import Kind, value_kind as _value_kind

BACKEND = "python"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def split_lines(lines):
    return [line.rstrip("\r\n").split("\t") for line in lines]


def join_rows(rows):
    if not rows:
        return ""
    return "\n".join(["\t".join(r) for r in rows]) + "\n"


def filter_rows(rows, i1, i2, i3, s1, s2, s3):
    """Rows whose cells at i1/i2/i3 fall in s1/s2/s3 (None = any value)."""
    tests = [(i, s) for i, s in ((i1, s1), (i2, s2), (i3, s3)) if s is not None]
    if not tests:
        return list(rows)
    need = max(i for i, _ in tests) + 1
    if len(tests) == 1:
        (i, s), = tests
        return [r for r in rows if len(r) >= need and r[i] in s]
    if len(tests) == 2:
        (i, s), (j, t) = tests
        return [r for r in rows if len(r) >= need and r[i] in s and r[j] in t]
    return [r for r in rows if len(r) >= need and r[i1] in s1 and r[i2] in s2 and r[i3] in s3]


def value_kind(text):
    return _value_kind(text)


def row_kinds(row):
    return [_value_kind(c) for c in row]


def fnv1a64(data, basis=_FNV_OFFSET):
    h = basis
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def hash_tokens(tokens, dim, sign_basis):
    """Bucket index and sign for each token."""
    out = []
    for tok in tokens:
        data = tok.encode("utf-8")
        idx = fnv1a64(data) % dim
        sign = 1 if fnv1a64(data, sign_basis) & 1 else -1
        out.append((idx, sign))
    return out


def union_find(n, src, dst):
    """Root (smallest index) of every node's set after uniting each edge."""
    parent = list(range(n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for a, b in zip(src.tolist(), dst.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    return np.array([find(i) for i in range(n)], dtype=np.int64)


def reach_many(indptr, indices, n, roots):
    """For each root, the nodes reachable from it in BFS order, root excluded."""
    indptr = indptr.tolist()
    indices = indices.tolist()
    mark = [0] * n
    result = []
    for stamp, root in enumerate(roots, 1):
        mark[root] = stamp
        queue = [root]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if mark[v] != stamp:
                    mark[v] = stamp
                    queue.append(v)
        result.append(queue[1:])
    return result


__all__ = ["BACKEND", "split_lines", "join_rows", "filter_rows", "value_kind",
           "row_kinds", "fnv1a64", "hash_tokens", "union_find", "reach_many", "Kind"]
