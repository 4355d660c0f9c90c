"""Independent reference implementations used to check the library.

Nothing here imports the code under test; each oracle is the slowest
obvious way to compute the answer.
"""
from __future__ import annotations

import itertools
import re
from collections import Counter, deque

import numpy as np


# -- filter / sort / join ------------------------------------------------------------

def brute_filter(rows, idx, sets):
    """Keep rows whose cell at idx[k] is in sets[k] for every non-None set."""
    out = []
    for r in rows:
        ok = True
        for i, s in zip(idx, sets):
            if s is not None and (i >= len(r) or r[i] not in s):
                ok = False
        if ok:
            out.append(r)
    return out


def nested_loop_join(left, right, lkeys, rkeys, join_type, lwidth, carried):
    """Rows as tuples: left row, then the carried right columns.

    Right-only rows have their key values copied into the left key columns.
    """
    out = []
    matched_right = set()
    rk = [tuple(r[b] for b in rkeys) for r in right]
    for lrow in left:
        hit = False
        lk = tuple(lrow[a] for a in lkeys)
        for j, rrow in enumerate(right):
            if lk == rk[j]:
                hit = True
                matched_right.add(j)
                out.append(tuple(lrow) + tuple(rrow[c] for c in carried))
        if not hit and join_type in ("left", "full"):
            out.append(tuple(lrow) + ("",) * len(carried))
    if join_type in ("right", "full"):
        for j, rrow in enumerate(right):
            if j in matched_right:
                continue
            base = [""] * lwidth
            for a, b in zip(lkeys, rkeys):
                base[a] = rrow[b]
            out.append(tuple(base) + tuple(rrow[c] for c in carried))
    return Counter(out)


# -- graph ---------------------------------------------------------------------------

def adjacency(n, edges):
    a = np.zeros((n, n))
    for u, v in edges:
        a[u, v] += 1.0
    return a


def dense_pagerank(n, edges, damping=0.85):
    """Exact stationary vector of the Google matrix via a linear solve."""
    a = adjacency(n, edges)
    out = a.sum(axis=1)
    p = np.zeros((n, n))
    for i in range(n):
        p[i] = a[i] / out[i] if out[i] else np.full(n, 1.0 / n)
    g = damping * p.T
    rhs = np.full(n, (1.0 - damping) / n)
    return np.linalg.solve(np.eye(n) - g, rhs)


def dense_hits(n, edges, iterations=5000):
    """Dense power iteration from a uniform hub vector, L2-normalized."""
    a = adjacency(n, edges)
    h = np.full(n, 1.0 / np.sqrt(n))
    auth = np.zeros(n)
    for _ in range(iterations):
        auth = a.T @ h
        auth /= np.linalg.norm(auth) or 1.0
        new_h = a @ auth
        new_h /= np.linalg.norm(new_h) or 1.0
        if np.abs(new_h - h).max() < 1e-15:
            h = new_h
            break
        h = new_h
    return h, auth


def closure(nodes, edges, roots):
    """(root, node) pairs from a boolean transitive closure; root excluded."""
    idx = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    reach = np.zeros((n, n), dtype=bool)
    for u, v in edges:
        reach[idx[u], idx[v]] = True
    for k in range(n):
        reach |= reach[:, [k]] & reach[[k], :]
    pairs = set()
    for r in roots:
        if r not in idx:
            continue
        for j in np.flatnonzero(reach[idx[r]]):
            if nodes[j] != r:
                pairs.add((r, nodes[j]))
    return pairs


def components(edges):
    """node -> smallest member of its undirected component, by BFS."""
    adj = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    result = {}
    for start in adj:
        if start in result:
            continue
        seen = {start}
        q = deque([start])
        while q:
            x = q.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    q.append(y)
        rep = min(seen)
        for x in seen:
            result[x] = rep
    return result


# -- hashing --------------------------------------------------------------------------

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211


def fnv1a(data: bytes, h: int = FNV_OFFSET) -> int:
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) % (1 << 64)
    return h


def hashed_vector(sentence: str, dim: int, sign_basis: int):
    vec = [0.0] * dim
    for tok in re.findall(r"[^\W_]+", sentence.lower()):
        b = tok.encode("utf-8")
        vec[fnv1a(b) % dim] += 1.0 if fnv1a(b, sign_basis) & 1 else -1.0
    norm = sum(v * v for v in vec) ** 0.5
    return [v / norm for v in vec] if norm else vec


# -- template -----------------------------------------------------------------------

DANGLING = [
    re.compile(r"\bis a\s*(,|$)"),
    re.compile(r"\bhas\s*(,|$)"),
    re.compile(r"\band\s*(,|$)"),
    re.compile(r",\s*,"),
    re.compile(r"^\s*,|,\s*$"),
    re.compile(r"\s{2,}"),
    re.compile(r"^\s|\s$"),
    re.compile(r"\band\s+and\b"),
]


def dangling_connectives(sentence: str):
    return [p.pattern for p in DANGLING if p.search(sentence)]


def slot_subsets(n_slots=5):
    return list(itertools.product([False, True], repeat=n_slots))
