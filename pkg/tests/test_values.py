from decimal import Decimal

import pytest
from hypothesis import given, settings

from generators import values
from kgtk.errors import MalformedValue
from kgtk.values import (EMPTY, Boolean, Coordinates, DateTime, Kind, KgtkList, LangString, Number,
                         Quantity, String, Symbol, canonical_text, display_text, normalize_value,
                         parse_value, serialize_value, split_unescaped_pipes, value_kind)

PAPER_LITERALS = [
    ("'Sprechen sie deutsch?'@de", LangString("Sprechen sie deutsch?", "de")),
    ("10m", Quantity(Number("10"), None, "m")),
    ("-1.2e+2[-1.0,+1.0]kg.m/s2", Quantity(Number("-1.2e+2"), (Number("-1.0"), Number("+1.0")), "kg.m/s2")),
    ("+17.2Q494083", Quantity(Number("+17.2"), None, "Q494083")),
    ("@043.26193/010.92708", Coordinates(Decimal("43.26193"), Decimal("10.92708"))),
    ("^1839-00-00T00:00:00Z/9", DateTime(1839, 0, 0, 0, 0, 0, "Z", 9)),
]


@pytest.mark.parametrize("text,expected", PAPER_LITERALS)
def test_paper_literals_parse_and_round_trip(text, expected):
    v = parse_value(text)
    assert v == expected
    assert serialize_value(v) == text


def test_quantity_unit_node():
    assert parse_value("+17.2Q494083").unit_is_node
    assert not parse_value("10m").unit_is_node


@pytest.mark.parametrize("text,kind", [
    ("", Kind.EMPTY), ("Q42", Kind.SYMBOL), ('"hi"', Kind.STRING), ("'hi'@en", Kind.LANG_STRING),
    ("42", Kind.NUMBER), ("-0.5e3", Kind.NUMBER), ("5kg", Kind.QUANTITY), ("5[4,6]", Kind.QUANTITY),
    ("@10/20", Kind.COORDINATES), ("^2020-01-02", Kind.DATE_TIME), ("True", Kind.BOOLEAN),
    ("False", Kind.BOOLEAN), ("Q1|Q2", Kind.LIST), ('"a\\|b"', Kind.STRING),
    ("'abc'@toolong5", Kind.MALFORMED), ("@999/0", Kind.MALFORMED), ('"a|b"', Kind.MALFORMED),
    ('"unterminated', Kind.MALFORMED), ("^2020-13-01", Kind.MALFORMED), ("has space", Kind.MALFORMED),
])
def test_value_kind(text, kind):
    assert value_kind(text) is kind
    if kind is Kind.MALFORMED:
        with pytest.raises(MalformedValue):
            parse_value(text)
    else:
        assert parse_value(text).kind is kind


def test_string_escapes():
    v = parse_value('"tab\\there \\"q\\" back\\\\slash pipe\\| nl\\n"')
    assert v == String('tab\there "q" back\\slash pipe| nl\n')
    assert parse_value(serialize_value(v)) == v


def test_serialized_cells_never_hold_raw_tabs_or_newlines():
    for v in (String("a\tb\nc"), LangString("x\ty", "en"), Symbol("a|b")):
        s = serialize_value(v)
        assert "\t" not in s and "\n" not in s
        assert parse_value(s) == v


def test_list_items():
    v = parse_value("Q1|'x'@en|5kg")
    assert isinstance(v, KgtkList)
    assert v.items == (Symbol("Q1"), LangString("x", "en"), Quantity(Number("5"), None, "kg"))
    assert split_unescaped_pipes('"a\\|b"|Q2') == ['"a\\|b"', "Q2"]
    with pytest.raises(MalformedValue):
        parse_value("Q1||Q2")


def test_language_tag_suffix():
    v = parse_value("'colour'@en-GB")
    assert v == LangString("colour", "en", "GB")
    assert serialize_value(v) == "'colour'@en-GB"


def test_date_ranges():
    assert parse_value("^2020-02-29T00:00:00Z").day == 29
    with pytest.raises(MalformedValue):
        parse_value("^2019-02-29T00:00:00Z")
    with pytest.raises(MalformedValue):
        parse_value("^2020-01-01T24:00:00Z")
    with pytest.raises(MalformedValue):
        parse_value("^2020-01-01T00:00:00Z/16")


def test_coordinate_ranges():
    assert parse_value("@-90/180") == Coordinates(Decimal(-90), Decimal(180))
    with pytest.raises(MalformedValue):
        parse_value("@90.1/0")
    with pytest.raises(MalformedValue):
        parse_value("@0/-180.5")


def test_malformed_value_carries_position_and_kind():
    with pytest.raises(MalformedValue) as exc:
        parse_value("'abc'@zzzz9")
    assert exc.value.kind == "language_tag"


def test_normalize():
    assert canonical_text("1.50E+3") == "1.50e+3"
    assert canonical_text("007") == "7"
    assert canonical_text("'x'@EN") == "'x'@en"
    assert canonical_text("@43.26193/10.92708") == "@043.26193/010.92708"
    assert normalize_value(EMPTY) is EMPTY
    assert canonical_text("Q5") == "Q5"


def test_display_text():
    assert display_text("'Saint David'@en") == "Saint David"
    assert display_text('"plain"') == "plain"
    assert display_text("Q5") == "Q5"


def test_booleans_and_symbols_distinct():
    assert parse_value("True") == Boolean(True)
    assert parse_value("true") == Symbol("true")


@settings(max_examples=500, deadline=None)
@given(values)
def test_round_trip_property(v):
    s = serialize_value(v)
    assert parse_value(s) == v
    assert value_kind(s) is v.kind


@settings(max_examples=300, deadline=None)
@given(values)
def test_normalize_idempotent(v):
    n = normalize_value(v)
    assert normalize_value(n) == n
    assert parse_value(serialize_value(n)) == n
