"""Both kernel backends must agree with each other and with the oracles."""
import random

import numpy as np
import pytest

from generators import random_value_text
from kgtk import kernels
from kgtk.values import value_kind as reference_kind
from oracles import fnv1a

IMPLS = kernels.implementations()


@pytest.fixture(params=sorted(IMPLS))
def impl(request):
    return IMPLS[request.param]


def test_compiled_backend_available():
    # the build ships the extension; the fallback must exist regardless
    assert "python" in IMPLS
    assert kernels.BACKEND in IMPLS


def test_split_join(impl):
    lines = ["a\tb\tc\n", "\t\t\r\n", "x\n", "last"]
    rows = impl.split_lines(lines)
    assert rows == [["a", "b", "c"], ["", "", ""], ["x"], ["last"]]
    assert impl.join_rows(rows) == "a\tb\tc\n\t\t\nx\nlast\n"
    assert impl.join_rows([]) == ""


def test_filter(impl):
    rows = [["a", "p", "b"], ["a", "q", "c"], ["d", "p", "b"], ["short"]]
    assert impl.filter_rows(rows, 0, 1, 2, None, {"p"}, None) == [rows[0], rows[2]]
    assert impl.filter_rows(rows, 0, 1, 2, {"a"}, {"p"}, {"b"}) == [rows[0]]
    assert impl.filter_rows(rows, 0, 1, 2, {"a", "d"}, None, {"b"}) == [rows[0], rows[2]]
    assert impl.filter_rows(rows, 0, 1, 2, None, None, None) == rows


def test_value_kind_matches_parser(impl):
    rng = random.Random(3)
    cells = [random_value_text(rng) for _ in range(2000)]
    cells += ["", "Q1", '"a|b"', "'x'@toolong", "@95/0", "^2020-02-30", "a b", '"open']
    assert [impl.value_kind(c) for c in cells] == [reference_kind(c) for c in cells]
    assert impl.row_kinds(cells[:10]) == [reference_kind(c) for c in cells[:10]]


def test_fnv_matches_reference_vectors(impl):
    # published FNV-1a 64-bit test vectors
    assert impl.fnv1a64(b"") == 0xCBF29CE484222325
    assert impl.fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert impl.fnv1a64(b"foobar") == 0x85944171F73967E8
    for word in (b"wales", b"cat", "é".encode()):
        assert impl.fnv1a64(word) == fnv1a(word)


def test_hash_tokens(impl):
    basis = 0x84222325CBF29CE4
    got = impl.hash_tokens(["wales", "cat"], 64, basis)
    want = [(fnv1a(t.encode()) % 64, 1 if fnv1a(t.encode(), basis) & 1 else -1) for t in ("wales", "cat")]
    assert list(map(tuple, got)) == want


def test_union_find(impl):
    src = np.array([0, 2, 5, 4], dtype=np.int64)
    dst = np.array([1, 3, 4, 6], dtype=np.int64)
    roots = np.asarray(impl.union_find(7, src, dst)).tolist()
    assert roots == [0, 0, 2, 2, 4, 4, 4]


def test_reach_many(impl):
    # 0->1->2, 2->0 (cycle), 3 isolated
    indptr = np.array([0, 1, 2, 3, 3], dtype=np.int64)
    indices = np.array([1, 2, 0], dtype=np.int64)
    res = impl.reach_many(indptr, indices, 4, [0, 3, 2])
    assert [list(r) for r in res] == [[1, 2], [], [0, 1]]


def test_backends_agree_on_random_graphs():
    if len(IMPLS) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(5)
    a, b = IMPLS["python"], IMPLS["cython"]
    for _ in range(20):
        n = int(rng.integers(1, 60))
        m = int(rng.integers(0, 120))
        src = rng.integers(0, n, m).astype(np.int64)
        dst = rng.integers(0, n, m).astype(np.int64)
        assert np.array_equal(np.asarray(a.union_find(n, src, dst)), np.asarray(b.union_find(n, src, dst)))
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        indices = dst[order].astype(np.int64)
        roots = list(range(n))
        assert [list(x) for x in a.reach_many(indptr, indices, n, roots)] == \
               [list(x) for x in b.reach_many(indptr, indices, n, roots)]
