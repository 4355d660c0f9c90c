"""Typed cell values and the literal grammar.

A cell is dispatched on its first character::

    "..."            string
    '...'@lang       language-qualified string
    @LAT/LON         coordinates
    ^YYYY-MM-DD...   date and time
    [+-]digit...     number, or quantity when a tolerance or unit follows
    True / False     boolean
    (empty)          empty
    a|b|c            list (any unescaped pipe)
    anything else    symbol
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional, Tuple, Union

from .errors import MalformedValue


class Kind(str, enum.Enum):
    SYMBOL = "symbol"
    STRING = "string"
    LANG_STRING = "lang_string"
    NUMBER = "number"
    QUANTITY = "quantity"
    COORDINATES = "coordinates"
    DATE_TIME = "date_time"
    BOOLEAN = "boolean"
    EMPTY = "empty"
    LIST = "list"
    MALFORMED = "malformed"


_NUM = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_UNIT = r"[A-Za-z][A-Za-z0-9./-]*"
NUMBER_RE = re.compile(_NUM)
QUANTITY_RE = re.compile(
    rf"(?P<amount>{_NUM})(?:\[(?P<low>{_NUM}),(?P<high>{_NUM})\])?(?P<unit>{_UNIT})?"
)
UNIT_RE = re.compile(_UNIT)
NODE_UNIT_RE = re.compile(r"Q\d+")
# a unit like "e5" glued to an amount would be read back as an exponent
_EXPONENT_LIKE_UNIT = re.compile(r"[eE]-?\d")

_COORD = r"[+-]?\d+(?:\.\d+)?"
COORDINATES_RE = re.compile(rf"@(?P<lat>{_COORD})/(?P<lon>{_COORD})")

DATE_RE = re.compile(
    r"\^(?P<sign>[+-]?)(?P<year>\d{4,})-(?P<month>\d{2})-(?P<day>\d{2})"
    r"(?:T(?P<hour>\d{2}):(?P<minute>\d{2})(?::(?P<second>\d{2}))?"
    r"(?P<tz>Z|[+-]\d{2}:?\d{2})?)?"
    r"(?:/(?P<precision>\d+))?"
)

LANG_RE = re.compile(r"(?P<lang>[a-zA-Z]{2,3})(?:-(?P<suffix>[a-zA-Z0-9]+(?:-[a-zA-Z0-9]+)*))?")
_STRING_BODY = re.compile(r'"((?:[^"\\]|\\.)*)"', re.S)
_LANG_BODY = re.compile(r"'((?:[^'\\]|\\.)*)'@(.*)", re.S)

_STRING_ESCAPES = {'"': '"', "'": "'", "\\": "\\", "t": "\t", "n": "\n", "|": "|"}
_WHITESPACE = frozenset(" \t\n\r\f\v")


# -- value types ------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Symbol:
    text: str
    kind = Kind.SYMBOL


@dataclass(frozen=True, slots=True)
class String:
    text: str
    kind = Kind.STRING


@dataclass(frozen=True, slots=True)
class LangString:
    text: str
    lang: str
    suffix: Optional[str] = None
    kind = Kind.LANG_STRING

    def __post_init__(self):
        tag = self.lang if self.suffix is None else f"{self.lang}-{self.suffix}"
        if not LANG_RE.fullmatch(tag):
            raise ValueError(f"invalid language tag {tag!r}")


@dataclass(frozen=True, slots=True)
class Number:
    """A number keeping the lexical form it was written in."""

    lexical: str
    kind = Kind.NUMBER

    def __post_init__(self):
        if not NUMBER_RE.fullmatch(self.lexical):
            raise ValueError(f"invalid number {self.lexical!r}")

    @property
    def value(self) -> float:
        return float(self.lexical)

    @classmethod
    def from_float(cls, x: float) -> "Number":
        return cls(repr(float(x)))


@dataclass(frozen=True, slots=True)
class Quantity:
    amount: Number
    tolerance: Optional[Tuple[Number, Number]] = None
    unit: Optional[str] = None
    kind = Kind.QUANTITY

    def __post_init__(self):
        if self.tolerance is None and self.unit is None:
            raise ValueError("a quantity needs a tolerance or a unit")
        if self.tolerance is not None:
            low, high = self.tolerance
            if low.value > high.value:
                raise ValueError("tolerance low bound exceeds high bound")
        if self.unit is not None:
            if not UNIT_RE.fullmatch(self.unit):
                raise ValueError(f"invalid unit {self.unit!r}")
            if (self.tolerance is None and "e" not in self.amount.lexical.lower()
                    and _EXPONENT_LIKE_UNIT.match(self.unit)):
                raise ValueError(f"unit {self.unit!r} is indistinguishable from an exponent")

    @property
    def unit_is_node(self) -> bool:
        return self.unit is not None and NODE_UNIT_RE.fullmatch(self.unit) is not None


@dataclass(frozen=True, slots=True)
class Coordinates:
    lat: Decimal
    lon: Decimal
    kind = Kind.COORDINATES

    def __post_init__(self):
        if not (-90 <= self.lat <= 90):
            raise ValueError(f"latitude {self.lat} out of range")
        if not (-180 <= self.lon <= 180):
            raise ValueError(f"longitude {self.lon} out of range")


@dataclass(frozen=True, slots=True)
class DateTime:
    year: int
    month: int = 0
    day: int = 0
    hour: int = 0
    minute: int = 0
    second: int = 0
    tz: Optional[str] = None
    precision: Optional[int] = None
    kind = Kind.DATE_TIME

    def __post_init__(self):
        problem = date_problem(self.year, self.month, self.day, self.hour,
                               self.minute, self.second, self.tz, self.precision)
        if problem:
            raise ValueError(problem[1])


@dataclass(frozen=True, slots=True)
class Boolean:
    value: bool
    kind = Kind.BOOLEAN


@dataclass(frozen=True, slots=True)
class Empty:
    kind = Kind.EMPTY


@dataclass(frozen=True, slots=True)
class KgtkList:
    items: tuple = field(default_factory=tuple)
    kind = Kind.LIST

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("a list holds at least two values")
        for item in self.items:
            if isinstance(item, (KgtkList, Empty)):
                raise ValueError("list items must be non-empty scalar values")


KgtkValue = Union[Symbol, String, LangString, Number, Quantity, Coordinates,
                  DateTime, Boolean, Empty, KgtkList]

EMPTY = Empty()


# -- dates ------------------------------------------------------------------

def _is_leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def days_in_month(year: int, month: int) -> int:
    if month == 2:
        return 29 if _is_leap(year) else 28
    return 30 if month in (4, 6, 9, 11) else 31


def _normalize_tz(tz: Optional[str]) -> Optional[str]:
    if tz is None or tz == "Z":
        return tz
    if len(tz) == 5:
        return f"{tz[:3]}:{tz[3:]}"
    return tz


def date_problem(year, month, day, hour, minute, second, tz, precision):
    """Return ``(component, message)`` for the first out-of-range field, else None."""
    if not 0 <= month <= 12:
        return "month", f"month {month} out of range"
    if month == 0 and day != 0:
        return "day", "day given without a month"
    if month and not 0 <= day <= days_in_month(year, month):
        return "day", f"day {day} out of range for month {month}"
    if not 0 <= day <= 31:
        return "day", f"day {day} out of range"
    if not 0 <= hour <= 23:
        return "hour", f"hour {hour} out of range"
    if not 0 <= minute <= 59:
        return "minute", f"minute {minute} out of range"
    if not 0 <= second <= 59:
        return "second", f"second {second} out of range"
    if tz is not None and tz != "Z":
        m = re.fullmatch(r"[+-](\d{2}):(\d{2})", tz)
        if not m or int(m.group(1)) > 23 or int(m.group(2)) > 59:
            return "tz", f"bad time zone {tz!r}"
    if precision is not None and not 0 <= precision <= 15:
        return "precision", f"precision {precision} out of range"
    return None


def date_fields(text: str) -> Optional[dict]:
    """Split a date literal into integer fields without range checking.

    Returns None when the text does not even have the shape of a date.
    """
    m = DATE_RE.fullmatch(text)
    if m is None:
        return None
    g = m.groupdict()
    year = int(g["year"])
    if g["sign"] == "-":
        year = -year
    return dict(
        year=year,
        month=int(g["month"]),
        day=int(g["day"]),
        hour=int(g["hour"] or 0),
        minute=int(g["minute"] or 0),
        second=int(g["second"] or 0),
        tz=_normalize_tz(g["tz"]),
        precision=None if g["precision"] is None else int(g["precision"]),
    )


# -- escaping ---------------------------------------------------------------

def has_unescaped_pipe(text: str) -> bool:
    if "|" not in text:
        return False
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == "|":
            return True
        i += 1
    return False


def split_unescaped_pipes(text: str) -> list:
    parts, start, i, n = [], 0, 0, len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == "|":
            parts.append(text[start:i])
            start = i + 1
        i += 1
    parts.append(text[start:])
    return parts


def _unescape_quoted(body: str, kind: str, offset: int) -> str:
    if "\\" not in body:
        return body
    out, i, n = [], 0, len(body)
    while i < n:
        c = body[i]
        if c == "\\":
            if i + 1 >= n:
                raise MalformedValue(kind, offset + i, "dangling backslash")
            rep = _STRING_ESCAPES.get(body[i + 1])
            if rep is None:
                raise MalformedValue(kind, offset + i, f"unknown escape \\{body[i + 1]}")
            out.append(rep)
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _escape_quoted(text: str, quote: str) -> str:
    return (text.replace("\\", "\\\\").replace(quote, "\\" + quote)
            .replace("\t", "\\t").replace("\n", "\\n").replace("|", "\\|"))


def _unescape_symbol(text: str) -> str:
    if "\\" not in text:
        return text
    out, i, n = [], 0, len(text)
    while i < n:
        c = text[i]
        if c == "\\" and i + 1 < n and text[i + 1] in "\\|":
            out.append(text[i + 1])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _escape_symbol(text: str) -> str:
    if "\\" not in text and "|" not in text:
        return text
    out = []
    n = len(text)
    for i, c in enumerate(text):
        if c == "|":
            out.append("\\|")
        elif c == "\\" and (i + 1 == n or text[i + 1] in "\\|"):
            out.append("\\\\")
        else:
            out.append(c)
    return "".join(out)


# -- parsing ----------------------------------------------------------------

def _parse_string(text: str) -> String:
    m = _STRING_BODY.fullmatch(text)
    if m is None:
        raise MalformedValue("string", 0, "unterminated or unescaped quote")
    return String(_unescape_quoted(m.group(1), "string", 1))


def _parse_lang_string(text: str) -> LangString:
    m = _LANG_BODY.fullmatch(text)
    if m is None:
        raise MalformedValue("lang_string", 0, "expected 'text'@lang")
    tag = LANG_RE.fullmatch(m.group(2))
    if tag is None:
        raise MalformedValue("language_tag", m.start(2), f"bad language tag {m.group(2)!r}")
    body = _unescape_quoted(m.group(1), "lang_string", 1)
    return LangString(body, tag.group("lang"), tag.group("suffix"))


def _parse_coordinates(text: str) -> Coordinates:
    m = COORDINATES_RE.fullmatch(text)
    if m is None:
        raise MalformedValue("coordinates", 0, "expected @LAT/LON")
    lat, lon = Decimal(m.group("lat")), Decimal(m.group("lon"))
    if not -90 <= lat <= 90:
        raise MalformedValue("coordinates", m.start("lat"), f"latitude {m.group('lat')} out of range")
    if not -180 <= lon <= 180:
        raise MalformedValue("coordinates", m.start("lon"), f"longitude {m.group('lon')} out of range")
    return Coordinates(lat, lon)


def _parse_date(text: str) -> DateTime:
    fields = date_fields(text)
    if fields is None:
        raise MalformedValue("date_time", 0, "expected ^YYYY-MM-DDThh:mm:ss[tz][/precision]")
    problem = date_problem(**fields)
    if problem:
        raise MalformedValue("date_time", 1, problem[1])
    return DateTime(**fields)


def _parse_numeric(text: str) -> Union[Number, Quantity]:
    m = QUANTITY_RE.fullmatch(text)
    if m is None:
        raise MalformedValue("quantity", 0, f"not a number or quantity: {text!r}")
    amount = Number(m.group("amount"))
    low, high, unit = m.group("low"), m.group("high"), m.group("unit")
    if low is None and unit is None:
        return amount
    tolerance = None
    if low is not None:
        tolerance = (Number(low), Number(high))
        if tolerance[0].value > tolerance[1].value:
            raise MalformedValue("quantity", m.start("low"), "tolerance low bound exceeds high bound")
    return Quantity(amount, tolerance, unit)


def _parse_symbol(text: str) -> Symbol:
    for i, c in enumerate(text):
        if c in _WHITESPACE:
            raise MalformedValue("symbol", i, "whitespace inside a symbol")
    return Symbol(_unescape_symbol(text))


def _parse_scalar(text: str) -> KgtkValue:
    c = text[0]
    if c == '"':
        return _parse_string(text)
    if c == "'":
        return _parse_lang_string(text)
    if c == "@":
        return _parse_coordinates(text)
    if c == "^":
        return _parse_date(text)
    if c in "+-0123456789":
        return _parse_numeric(text)
    if text == "True":
        return Boolean(True)
    if text == "False":
        return Boolean(False)
    return _parse_symbol(text)


def parse_value(text: str) -> KgtkValue:
    """Parse one cell into a typed value, raising MalformedValue on bad input."""
    if not text:
        return EMPTY
    for bad in ("\t", "\n"):
        pos = text.find(bad)
        if pos >= 0:
            raise MalformedValue("cell", pos, "raw tab or newline inside a cell")
    if has_unescaped_pipe(text):
        parts = split_unescaped_pipes(text)
        items = []
        offset = 0
        for part in parts:
            if not part:
                raise MalformedValue("list", offset, "empty list item")
            try:
                items.append(_parse_scalar(part))
            except MalformedValue as e:
                raise MalformedValue(e.kind, offset + e.position, e.message) from None
            offset += len(part) + 1
        return KgtkList(tuple(items))
    return _parse_scalar(text)


# -- classification without building values ---------------------------------

_SIGILS = frozenset("\"'@^+-0123456789")


def _string_ok(body: str, quote: str) -> bool:
    i, n = 0, len(body)
    while i < n:
        c = body[i]
        if c == "\\":
            if i + 1 >= n or body[i + 1] not in _STRING_ESCAPES:
                return False
            i += 2
            continue
        if c == quote:
            return False
        i += 1
    return True


def _scalar_kind(text: str) -> Kind:
    c = text[0]
    if c == '"':
        if len(text) >= 2 and text[-1] == '"' and _string_ok(text[1:-1], '"'):
            return Kind.STRING
        return Kind.MALFORMED
    if c == "'":
        m = _LANG_BODY.fullmatch(text)
        if m and LANG_RE.fullmatch(m.group(2)) and _string_ok(m.group(1), "'"):
            return Kind.LANG_STRING
        return Kind.MALFORMED
    if c == "@":
        m = COORDINATES_RE.fullmatch(text)
        if m and -90 <= Decimal(m.group("lat")) <= 90 and -180 <= Decimal(m.group("lon")) <= 180:
            return Kind.COORDINATES
        return Kind.MALFORMED
    if c == "^":
        fields = date_fields(text)
        if fields is not None and date_problem(**fields) is None:
            return Kind.DATE_TIME
        return Kind.MALFORMED
    if c in "+-0123456789":
        m = QUANTITY_RE.fullmatch(text)
        if m is None:
            return Kind.MALFORMED
        if m.group("low") is None and m.group("unit") is None:
            return Kind.NUMBER
        if m.group("low") is not None and float(m.group("low")) > float(m.group("high")):
            return Kind.MALFORMED
        return Kind.QUANTITY
    if text == "True" or text == "False":
        return Kind.BOOLEAN
    for ch in text:
        if ch in _WHITESPACE:
            return Kind.MALFORMED
    return Kind.SYMBOL


def value_kind(text: str) -> Kind:
    """Kind that :func:`parse_value` would produce, or ``Kind.MALFORMED``."""
    if not text:
        return Kind.EMPTY
    if "\t" in text or "\n" in text:
        return Kind.MALFORMED
    if has_unescaped_pipe(text):
        for part in split_unescaped_pipes(text):
            if not part or _scalar_kind(part) is Kind.MALFORMED:
                return Kind.MALFORMED
        return Kind.LIST
    return _scalar_kind(text)


# -- serialization ------------------------------------------------------------

def _format_degrees(d: Decimal) -> str:
    sign = "-" if d.is_signed() else ""
    body = format(abs(d), "f")
    whole, dot, frac = body.partition(".")
    return f"{sign}{whole.zfill(3)}{dot}{frac}"


def serialize_value(v: KgtkValue) -> str:
    """Lexical form of a value; ``parse_value`` inverts it."""
    k = v.kind
    if k is Kind.SYMBOL:
        return _escape_symbol(v.text)
    if k is Kind.STRING:
        return '"' + _escape_quoted(v.text, '"') + '"'
    if k is Kind.LANG_STRING:
        tag = v.lang if v.suffix is None else f"{v.lang}-{v.suffix}"
        return "'" + _escape_quoted(v.text, "'") + "'@" + tag
    if k is Kind.NUMBER:
        return v.lexical
    if k is Kind.QUANTITY:
        out = v.amount.lexical
        if v.tolerance is not None:
            out += f"[{v.tolerance[0].lexical},{v.tolerance[1].lexical}]"
        if v.unit is not None:
            out += v.unit
        return out
    if k is Kind.COORDINATES:
        return f"@{_format_degrees(v.lat)}/{_format_degrees(v.lon)}"
    if k is Kind.DATE_TIME:
        sign = "-" if v.year < 0 else ""
        out = (f"^{sign}{abs(v.year):04d}-{v.month:02d}-{v.day:02d}"
               f"T{v.hour:02d}:{v.minute:02d}:{v.second:02d}")
        if v.tz is not None:
            out += v.tz
        if v.precision is not None:
            out += f"/{v.precision}"
        return out
    if k is Kind.BOOLEAN:
        return "True" if v.value else "False"
    if k is Kind.EMPTY:
        return ""
    if k is Kind.LIST:
        return "|".join(serialize_value(item) for item in v.items)
    raise TypeError(f"not a KGTK value: {v!r}")


# -- canonical forms ----------------------------------------------------------

def _canonical_number(n: Number) -> Number:
    lex = n.lexical.replace("E", "e")
    sign = ""
    if lex[0] in "+-":
        sign, lex = lex[0], lex[1:]
    mant, e, exp = lex.partition("e")
    whole, dot, frac = mant.partition(".")
    whole = whole.lstrip("0") or "0"
    if exp:
        esign = ""
        if exp[0] in "+-":
            esign, exp = exp[0], exp[1:]
        exp = esign + (exp.lstrip("0") or "0")
    return Number(f"{sign}{whole}{dot}{frac}{e}{exp}")


def normalize_value(v: KgtkValue) -> KgtkValue:
    """Canonical variant of a value: lower-case language codes, numbers
    without redundant leading zeros and with a lower-case exponent marker.
    Coordinates and dates are canonical by construction."""
    k = v.kind
    if k is Kind.LANG_STRING:
        return LangString(v.text, v.lang.lower(), v.suffix)
    if k is Kind.NUMBER:
        return _canonical_number(v)
    if k is Kind.QUANTITY:
        tol = v.tolerance
        if tol is not None:
            tol = (_canonical_number(tol[0]), _canonical_number(tol[1]))
        return Quantity(_canonical_number(v.amount), tol, v.unit)
    if k is Kind.LIST:
        return KgtkList(tuple(normalize_value(i) for i in v.items))
    return v


def canonical_text(text: str) -> str:
    """Re-serialize a cell in canonical form (raises MalformedValue)."""
    return serialize_value(normalize_value(parse_value(text)))


def display_text(text: str) -> str:
    """Human-readable form of a cell: strings lose their quotes and tags."""
    if not text:
        return ""
    try:
        v = parse_value(text)
    except MalformedValue:
        return text
    if v.kind in (Kind.STRING, Kind.LANG_STRING, Kind.SYMBOL):
        return v.text
    if v.kind is Kind.LIST:
        return ", ".join(display_text(serialize_value(i)) for i in v.items)
    return text
