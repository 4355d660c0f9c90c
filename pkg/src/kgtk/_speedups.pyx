# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""
from libc.stdint cimport uint64_t, int64_t

from .values import Kind, value_kind as _py_value_kind

BACKEND = "cython"

cdef uint64_t _FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t _FNV_PRIME = 0x100000001B3ULL

cdef object K_EMPTY = Kind.EMPTY
cdef object K_SYMBOL = Kind.SYMBOL
cdef object K_STRING = Kind.STRING


def split_lines(list lines):
    cdef list out = []
    cdef str line
    for line in lines:
        out.append(line.rstrip("\r\n").split("\t"))
    return out


def join_rows(list rows):
    if not rows:
        return ""
    cdef list parts = []
    cdef list r
    for r in rows:
        parts.append("\t".join(r))
    parts.append("")
    return "\n".join(parts)


def filter_rows(list rows, Py_ssize_t i1, Py_ssize_t i2, Py_ssize_t i3, s1, s2, s3):
    cdef list out = []
    cdef list r
    cdef Py_ssize_t need = 0
    cdef bint t1 = s1 is not None
    cdef bint t2 = s2 is not None
    cdef bint t3 = s3 is not None
    if not (t1 or t2 or t3):
        return list(rows)
    if t1 and i1 + 1 > need:
        need = i1 + 1
    if t2 and i2 + 1 > need:
        need = i2 + 1
    if t3 and i3 + 1 > need:
        need = i3 + 1
    cdef set f1 = set(s1) if t1 else None
    cdef set f2 = set(s2) if t2 else None
    cdef set f3 = set(s3) if t3 else None
    for r in rows:
        if len(r) < need:
            continue
        if t2 and r[i2] not in f2:
            continue
        if t1 and r[i1] not in f1:
            continue
        if t3 and r[i3] not in f3:
            continue
        out.append(r)
    return out


cdef bint _symbol_simple(str text):
    # plain symbol: no whitespace, no backslash, no pipe
    cdef Py_UCS4 c
    for c in text:
        if c == u' ' or c == u'\t' or c == u'\n' or c == u'\r' or c == u'\f' \
                or c == u'\v' or c == u'|' or c == u'\\':
            return False
    return True


cdef bint _string_simple(str text):
    # "..." with no escapes, quotes, pipes or raw tabs/newlines inside
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i
    cdef Py_UCS4 c
    if n < 2 or text[n - 1] != u'"':
        return False
    for i in range(1, n - 1):
        c = text[i]
        if c == u'"' or c == u'\\' or c == u'|' or c == u'\t' or c == u'\n':
            return False
    return True


def value_kind(str text):
    if not text:
        return K_EMPTY
    cdef Py_UCS4 c = text[0]
    if c == u'"':
        if _string_simple(text):
            return K_STRING
        return _py_value_kind(text)
    if c == u"'" or c == u'@' or c == u'^' or c == u'+' or c == u'-' or (u'0' <= c <= u'9'):
        return _py_value_kind(text)
    if text == "True" or text == "False":
        return _py_value_kind(text)
    if _symbol_simple(text):
        return K_SYMBOL
    return _py_value_kind(text)


def row_kinds(list row):
    return [value_kind(c) for c in row]


cdef uint64_t _fnv(bytes data, uint64_t basis):
    cdef uint64_t h = basis
    cdef const unsigned char[:] view = data
    cdef Py_ssize_t i
    for i in range(view.shape[0]):
        h ^= view[i]
        h *= _FNV_PRIME
    return h


def fnv1a64(data, basis=None):
    cdef uint64_t b = _FNV_OFFSET if basis is None else <uint64_t>basis
    return _fnv(bytes(data), b)


def hash_tokens(tokens, Py_ssize_t dim, sign_basis):
    cdef list out = []
    cdef bytes data
    cdef uint64_t sb = <uint64_t>sign_basis
    for tok in tokens:
        data = tok.encode("utf-8")
        idx = <Py_ssize_t>(_fnv(data, _FNV_OFFSET) % <uint64_t>dim)
        sign = 1 if (_fnv(data, sb) & 1) else -1
        out.append((idx, sign))
    return out


cdef Py_ssize_t _find(int64_t[:] parent, Py_ssize_t x):
    cdef Py_ssize_t root = x
    cdef Py_ssize_t nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def union_find(Py_ssize_t n, const int64_t[:] src, const int64_t[:] dst):
    import numpy as np
    parent_arr = np.arange(n, dtype=np.int64)
    cdef int64_t[:] parent = parent_arr
    cdef Py_ssize_t k, ra, rb
    for k in range(src.shape[0]):
        ra = _find(parent, src[k])
        rb = _find(parent, dst[k])
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    for k in range(n):
        parent[k] = _find(parent, k)
    return parent_arr


def reach_many(const int64_t[:] indptr, const int64_t[:] indices, Py_ssize_t n, roots):
    import numpy as np
    mark_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[:] mark = mark_arr
    queue_arr = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[:] queue = queue_arr
    cdef Py_ssize_t head, tail, u, v, k
    cdef int64_t stamp = 0
    cdef list result = []
    for root in roots:
        stamp += 1
        u = root
        mark[u] = stamp
        head = 0
        tail = 0
        queue[tail] = u
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if mark[v] != stamp:
                    mark[v] = stamp
                    queue[tail] = v
                    tail += 1
        result.append(queue_arr[1:tail].tolist())
    return result
