import random

import pytest

from generators import random_rows
from kgtk.edges import EdgeStream
from kgtk.errors import PatternSyntax, ProtectedColumn, UnknownColumn
from kgtk.transform import FilterPattern, cat, filter_edges, parse_pattern, remove_columns
from oracles import brute_filter

HEADER = ["node1", "label", "node2", "creator", "source", "id"]
SNIPPET = [
    ['"Moe"', "rdf:type", "Person", '"Hans"', "Wikipedia", "E1"],
    ['"Larry"', "rdf:type", "Person", '"Hans"', "Wikipedia", "E2"],
    ['"Curly"', "rdf:type", "Person", "", "Wikipedia", "E3"],
    ['"Curly"', "hasFriend", '"Moe"', "", "Wikipedia", "E4"],
]


def s(rows, header=HEADER):
    return EdgeStream.from_rows(list(header), [list(r) for r in rows])


@pytest.mark.parametrize("text,expected", [
    (" ; P154,P279 ; ", (None, {"P154", "P279"}, None)),
    (" ; P31 ; Q5", (None, {"P31"}, {"Q5"})),
    ("Q8023,Q483203,Q1426;P106;", ({"Q8023", "Q483203", "Q1426"}, {"P106"}, None)),
])
def test_parse_pattern(text, expected):
    p = parse_pattern(text)
    got = (p.subjects, p.predicates, p.objects)
    assert got == tuple(None if e is None else frozenset(e) for e in expected)


@pytest.mark.parametrize("bad", ["P31", "a;b", "a;b;c;d"])
def test_parse_pattern_separator_count(bad):
    with pytest.raises(PatternSyntax):
        parse_pattern(bad)


def test_filter_snippet(backend):
    assert filter_edges(s(SNIPPET), parse_pattern(" ; hasFriend ; ")).collect() == [SNIPPET[3]]


def test_wildcard_filter_is_identity():
    p = parse_pattern(" ; ; ")
    assert p.is_identity
    assert filter_edges(s(SNIPPET), p).collect() == SNIPPET


def test_humans_filter_on_toy_extract():
    rows = [["Q1", "P31", "Q5"], ["Q2", "P31", "Q515"], ["Q3", "P31", "Q5"],
            ["Q1", "P27", "Q30"], ["Q5", "P31", "Q16889133"], ["Q4", "P279", "Q5"]]
    got = filter_edges(s(rows, HEADER[:3]), parse_pattern(" ; P31 ; Q5")).collect()
    assert got == brute_filter(rows, (0, 1, 2), (None, {"P31"}, {"Q5"}))
    assert len(got) == 2


def test_filter_matches_brute_force_and_composes(backend):
    rng = random.Random(4)
    rows = random_rows(rng, 500, n_nodes=15, n_labels=4)
    for _ in range(30):
        sets = [rng.choice([None, {f"Q{rng.randrange(15)}" for _ in range(3)}]),
                rng.choice([None, {f"P{rng.randrange(4)}"}]),
                rng.choice([None, {f"Q{rng.randrange(15)}" for _ in range(5)}])]
        p1 = FilterPattern(*[frozenset(x) if x else None for x in sets])
        got = filter_edges(s(rows, HEADER[:4]), p1).collect()
        assert got == brute_filter(rows, (0, 1, 2), sets)
        p2 = FilterPattern(None, frozenset({"P1", "P2"}), None)
        twice = filter_edges(filter_edges(s(rows, HEADER[:4]), p1), p2).collect()
        assert twice == filter_edges(s(rows, HEADER[:4]), p1 & p2).collect()


def test_cat_row_count_and_order():
    a = [["Q1", "P106", "Q8023"], ["Q2", "P106", "Q1426"]]
    b = [["Q8023", "P279", "Q3"]]
    out = cat([s(a, HEADER[:3]), s(b, HEADER[:3])]).collect()
    assert out == a + b


def test_cat_one_file_is_identity():
    assert cat([s(SNIPPET)]).collect() == SNIPPET


def test_cat_union_of_columns():
    a = s([["a", "p", "b", "E1", "me"]], ["node1", "label", "node2", "id", "creator"])
    b = s([["c", "p", "d", "E2", "wiki"]], ["node1", "label", "node2", "id", "source"])
    out = cat([a, b])
    assert out.header.columns == ("node1", "label", "node2", "id", "creator", "source")
    assert out.collect() == [["a", "p", "b", "E1", "me", ""], ["c", "p", "d", "E2", "", "wiki"]]


def test_cat_aligns_aliased_roles():
    a = s([["a", "p", "b"]], ["node1", "label", "node2"])
    b = s([["p", "c", "d"]], ["predicate", "subject", "object"])
    assert cat([a, b]).collect() == [["a", "p", "b"], ["c", "p", "d"]]


def test_cat_associative():
    rng = random.Random(9)
    parts = [random_rows(rng, 20, extra=0) for _ in range(3)]
    flat = cat([s(p, HEADER[:3]) for p in parts]).collect()
    nested = cat([s(parts[0], HEADER[:3]),
                  cat([s(parts[1], HEADER[:3]), s(parts[2], HEADER[:3])])]).collect()
    assert flat == nested


def test_remove_columns():
    out = remove_columns(s(SNIPPET), ["creator", "source"])
    assert out.header.columns == ("node1", "label", "node2", "id")
    assert out.header.id == 3
    assert out.collect() == [r[:3] + [r[5]] for r in SNIPPET]


def test_remove_nothing_is_identity():
    assert remove_columns(s(SNIPPET), []).collect() == SNIPPET


def test_remove_protected_column():
    with pytest.raises(ProtectedColumn):
        remove_columns(s(SNIPPET), ["node1"])


def test_remove_unknown_column():
    assert remove_columns(s(SNIPPET), ["nope"]).collect() == SNIPPET
    with pytest.raises(UnknownColumn):
        remove_columns(s(SNIPPET), ["nope"], strict=True)


def test_remove_columns_commutes():
    a = remove_columns(remove_columns(s(SNIPPET), ["creator"]), ["id"]).collect()
    b = remove_columns(remove_columns(s(SNIPPET), ["id"]), ["creator"]).collect()
    assert a == b
