"""Conversions between KGTK and N-Triples, ConceptNet dumps and a plain
two-file property-graph layout."""
from __future__ import annotations

import io
import logging
import re
import sys
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple

from .edges import BATCH_ROWS, EdgeStream, open_reader, resolve_header
from .errors import (IoFailure, MalformedRow, MalformedTriple, MalformedValue,
                     NonSymbolSubject, UnexpandablePrefix)
from .values import (Boolean, Coordinates, DateTime, Kind, KgtkList, LangString, Number, Quantity,
                     String, Symbol, parse_value, serialize_value, value_kind)

log = logging.getLogger(__name__)

XSD = "http://www.w3.org/2001/XMLSchema#"
KGTK_NODE_BASE = "https://kgtk.invalid/node/"
KGTK_DATATYPE_BASE = "https://kgtk.invalid/datatype#"

DEFAULT_PREFIXES = (
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("xsd", XSD),
    ("wd", "http://www.wikidata.org/entity/"),
    ("wdt", "http://www.wikidata.org/prop/direct/"),
)

# datatype IRIs for KGTK literals that have no RDF counterpart
DATATYPE_IRIS = {
    Kind.QUANTITY: KGTK_DATATYPE_BASE + "quantity",
    Kind.COORDINATES: KGTK_DATATYPE_BASE + "coordinates",
    Kind.DATE_TIME: KGTK_DATATYPE_BASE + "date_time",
    Kind.BOOLEAN: XSD + "boolean",
}
_KIND_OF_DATATYPE = {v: k for k, v in DATATYPE_IRIS.items()}
NUMERIC_DATATYPES = {XSD + t for t in (
    "integer", "decimal", "double", "float", "int", "long", "short", "byte",
    "nonNegativeInteger", "positiveInteger", "negativeInteger", "nonPositiveInteger",
    "unsignedInt", "unsignedLong", "unsignedShort", "unsignedByte")}

_IRI_UNSAFE = re.compile(r'[\x00-\x20<>"{}|^`\\]')


def _pct(m):
    return "".join(f"%{b:02X}" for b in m.group(0).encode("utf-8"))


def _iri_safe(text: str) -> str:
    return _IRI_UNSAFE.sub(_pct, text)


class NamespaceTable:
    """Ordered prefix -> IRI base pairs; compression picks the longest base."""

    def __init__(self, pairs: Iterable[Tuple[str, str]] = DEFAULT_PREFIXES, default_base: str = KGTK_NODE_BASE):
        self.prefixes: Dict[str, str] = {}
        for prefix, base in pairs:
            self.add(prefix, base)
        self.default_base = default_base

    def add(self, prefix: str, base: str):
        if not base:
            raise ValueError(f"empty IRI base for prefix {prefix!r}")
        if not re.fullmatch(r"[A-Za-z][\w.-]*", prefix):
            raise ValueError(f"bad prefix {prefix!r}")
        if prefix in self.prefixes and self.prefixes[prefix] != base:
            raise ValueError(f"prefix {prefix!r} defined twice")
        self.prefixes[prefix] = base
        self._by_length = sorted(self.prefixes.items(), key=lambda kv: -len(kv[1]))

    @classmethod
    def from_file(cls, path, include_defaults: bool = True) -> "NamespaceTable":
        """Two tab-separated columns, prefix and namespace; a header line is optional."""
        table = cls(DEFAULT_PREFIXES if include_defaults else ())
        try:
            with open(path, encoding="utf-8") as fh:
                for n, line in enumerate(fh, 1):
                    line = line.rstrip("\r\n")
                    if not line or line.startswith("#"):
                        continue
                    parts = line.split("\t")
                    if n == 1 and parts[0] in ("prefix", "node1"):
                        continue
                    if len(parts) < 2:
                        raise ValueError(f"{path}:{n}: expected prefix<TAB>namespace")
                    table.add(parts[0].strip(), parts[-1].strip().strip("<>"))
        except OSError as e:
            raise IoFailure(f"cannot read prefixes file {path}: {e}") from e
        return table

    def compress(self, iri: str) -> str:
        """IRI -> KGTK symbol text (``prefix:local``, bare local, or ``<iri>``)."""
        for prefix, base in self._by_length:
            if iri.startswith(base) and len(iri) > len(base):
                local = iri[len(base):]
                if "|" not in local and "\\" not in local:
                    return f"{prefix}:{local}"
        db = self.default_base
        if db and iri.startswith(db) and len(iri) > len(db):
            local = iri[len(db):]
            if ":" not in local and "%" not in local and value_kind(local) is Kind.SYMBOL \
                    and not local.startswith("_"):
                return local
        return f"<{iri}>"

    def expand(self, symbol: str) -> str:
        """KGTK symbol text -> N-Triples term (``<iri>`` or ``_:label``)."""
        if symbol.startswith("<") and symbol.endswith(">") and len(symbol) > 2:
            return symbol
        if symbol.startswith("_:"):
            return symbol
        if ":" in symbol:
            prefix, local = symbol.split(":", 1)
            base = self.prefixes.get(prefix)
            if base is None:
                raise UnexpandablePrefix(f"no namespace for prefix {prefix!r} in {symbol!r}")
            return f"<{base}{_iri_safe(local)}>"
        return f"<{self.default_base}{_iri_safe(symbol)}>"


# -- N-Triples lexing -------------------------------------------------------------

_IRI = r"<((?:[^<>\"{}|^`\\\x00-\x20]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*)>"
_BNODE = r"_:([A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)"
_LIT = r"\"((?:[^\"\\\n\r]|\\.)*)\"(?:@([A-Za-z]+(?:-[A-Za-z0-9]+)*)|\^\^" + _IRI + r")?"
_TRIPLE = re.compile(
    r"[ \t]*(?:" + _IRI + r"|" + _BNODE + r")"
    r"[ \t]+" + _IRI +
    r"[ \t]+(?:" + _IRI + r"|" + _BNODE + r"|" + _LIT + r")"
    r"[ \t]*\.[ \t]*(?:#.*)?")
_BLANK = re.compile(r"[ \t]*(?:#.*)?")
_ECHAR = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))", re.S)
_ECHARS = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(text: str, line_number: int) -> str:
    if "\\" not in text:
        return text

    def rep(m):
        if m.group(1) or m.group(2):
            return chr(int(m.group(1) or m.group(2), 16))
        ch = _ECHARS.get(m.group(3))
        if ch is None:
            raise MalformedTriple(line_number, f"bad escape \\{m.group(3)}")
        return ch
    return _ECHAR.sub(rep, text)


def _escape_literal(text: str) -> str:
    return (text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
            .replace("\r", "\\r").replace("\t", "\\t"))


@dataclass(frozen=True)
class Term:
    """One N-Triples term: kind is iri, bnode or literal."""
    kind: str
    value: str
    lang: Optional[str] = None
    datatype: Optional[str] = None

    def ntriples(self) -> str:
        if self.kind == "iri":
            return f"<{self.value}>"
        if self.kind == "bnode":
            return f"_:{self.value}"
        body = f'"{_escape_literal(self.value)}"'
        if self.lang:
            return f"{body}@{self.lang}"
        if self.datatype:
            return f"{body}^^<{self.datatype}>"
        return body


def parse_triple(line: str, line_number: int = 0) -> Optional[Tuple[Term, Term, Term]]:
    """Parse one N-Triples line; None for blank and comment lines."""
    line = line.rstrip("\r\n")
    m = _TRIPLE.fullmatch(line)
    if m is None:
        if _BLANK.fullmatch(line):
            return None
        raise MalformedTriple(line_number, f"not a triple: {line[:80]!r}")
    g = m.groups()
    s = Term("iri", _unescape(g[0], line_number)) if g[0] is not None else Term("bnode", g[1])
    p = Term("iri", _unescape(g[2], line_number))
    if g[3] is not None:
        o = Term("iri", _unescape(g[3], line_number))
    elif g[4] is not None:
        o = Term("bnode", g[4])
    else:
        dt = _unescape(g[7], line_number) if g[7] is not None else None
        if dt == XSD + "string":
            dt = None
        o = Term("literal", _unescape(g[5], line_number), g[6], dt)
    return s, p, o


# -- import ------------------------------------------------------------------------

def _default_numeric_type(lex: str) -> str:
    if "e" in lex or "E" in lex:
        return XSD + "double"
    if "." in lex:
        return XSD + "decimal"
    return XSD + "integer"


def term_to_cells(term: Term, ns: NamespaceTable, line_number: int = 0) -> Tuple[str, str]:
    """(KGTK cell, datatype cell) for one term."""
    if term.kind == "iri":
        return serialize_value(Symbol(ns.compress(term.value))), ""
    if term.kind == "bnode":
        return "_:" + term.value, ""
    if term.lang is not None:
        try:
            return serialize_value(LangString(term.value, *_split_lang(term.lang))), ""
        except (ValueError, MalformedValue):
            raise MalformedTriple(line_number, f"language tag {term.lang!r} is not representable") from None
    dt = term.datatype
    if dt is None:
        return serialize_value(String(term.value)), ""
    if dt in NUMERIC_DATATYPES and value_kind(term.value) is Kind.NUMBER:
        recorded = "" if dt == _default_numeric_type(term.value) else serialize_value(Symbol(ns.compress(dt)))
        return term.value, recorded
    kind = _KIND_OF_DATATYPE.get(dt)
    if kind is Kind.BOOLEAN and term.value in ("true", "false"):
        return ("True" if term.value == "true" else "False"), ""
    if kind is not None and kind is not Kind.BOOLEAN and value_kind(term.value) is kind:
        return term.value, ""
    return serialize_value(String(term.value)), serialize_value(Symbol(ns.compress(dt)))


def _split_lang(tag: str):
    primary, _, rest = tag.partition("-")
    return primary, (rest or None)


IMPORT_COLUMNS = ("node1", "label", "node2", "datatype")


@dataclass
class ImportReport:
    read: int = 0
    written: int = 0
    errors: List[str] = field(default_factory=list)


def import_ntriples(source="-", namespaces: Optional[NamespaceTable] = None, strict: bool = False,
                    report: Optional[ImportReport] = None) -> EdgeStream:
    ns = namespaces or NamespaceTable()
    report = report if report is not None else ImportReport()
    fh, owned = _open_lines(source)

    def gen():
        out = []
        try:
            for n, line in enumerate(fh, 1):
                try:
                    t = parse_triple(line, n)
                    if t is None:
                        continue
                    report.read += 1
                    s, p, o = t
                    node1, _ = term_to_cells(s, ns, n)
                    label, _ = term_to_cells(p, ns, n)
                    node2, dtype = term_to_cells(o, ns, n)
                except MalformedTriple as e:
                    if strict:
                        raise
                    log.warning("%s", e)
                    report.errors.append(str(e))
                    continue
                out.append([node1, label, node2, dtype])
                report.written += 1
                if len(out) >= BATCH_ROWS:
                    yield out
                    out = []
            if out:
                yield out
        finally:
            if owned:
                fh.close()

    return EdgeStream(resolve_header(IMPORT_COLUMNS), gen(), str(source))


def _open_lines(source):
    if source == "-" or source is None:
        return io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8", newline="\n"), False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        try:
            return open(source, encoding="utf-8", newline="\n"), True
        except OSError as e:
            raise IoFailure(f"cannot open {source}: {e}") from e
    return source, False


# -- export ------------------------------------------------------------------------

def _node_term(cell: str, ns: NamespaceTable, role: str) -> str:
    kind = value_kind(cell)
    if kind is not Kind.SYMBOL:
        raise NonSymbolSubject(f"{role} {cell!r} is a {kind.value}, not a symbol")
    v = parse_value(cell)
    return ns.expand(v.text)


def object_terms(cell: str, ns: NamespaceTable, datatype: str = "") -> List[str]:
    """N-Triples object terms for a KGTK cell (lists give one term per item)."""
    if not cell:
        return []
    v = parse_value(cell)
    if isinstance(v, KgtkList):
        return [t for item in v.items for t in object_terms(serialize_value(item), ns)]
    if datatype:
        dt_iri = ns.expand(parse_value(datatype).text if value_kind(datatype) is Kind.SYMBOL else datatype)
        text = v.text if isinstance(v, String) else cell
        return [f'"{_escape_literal(text)}"^^{dt_iri}']
    if isinstance(v, Symbol):
        return [ns.expand(v.text)]
    if isinstance(v, String):
        return [f'"{_escape_literal(v.text)}"']
    if isinstance(v, LangString):
        tag = v.lang + (f"-{v.suffix}" if v.suffix else "")
        return [f'"{_escape_literal(v.text)}"@{tag}']
    if isinstance(v, Number):
        return [f'"{v.lexical}"^^<{_default_numeric_type(v.lexical)}>']
    if isinstance(v, Boolean):
        return [f'"{"true" if v.value else "false"}"^^<{DATATYPE_IRIS[Kind.BOOLEAN]}>']
    if isinstance(v, (Quantity, Coordinates, DateTime)):
        return [f'"{_escape_literal(cell)}"^^<{DATATYPE_IRIS[v.kind]}>']
    raise MalformedValue(value_kind(cell).value, 0, f"cannot export {cell!r}")


def export_ntriples(stream: EdgeStream, namespaces: Optional[NamespaceTable] = None,
                    lenient: bool = False) -> Iterator[str]:
    """Yield N-Triples lines. Extra columns become statements about the edge id."""
    ns = namespaces or NamespaceTable()
    h = stream.header
    dt_idx = h.columns.index("datatype") if "datatype" in h.columns else None
    quals = [i for i in h.extra_indices if i != dt_idx]
    width = len(h.columns)
    qual_preds = {}
    for i in quals:
        name = h.columns[i]
        qual_preds[i] = ns.expand(name) if value_kind(name) is Kind.SYMBOL else f"<{KGTK_NODE_BASE}{_iri_safe(name)}>"
    for n, r in enumerate(stream.rows(), 2):
        if len(r) < width:
            r = r + [""] * (width - len(r))
        try:
            s = _node_term(r[h.node1], ns, "node1")
            p = _node_term(r[h.label], ns, "label")
            dt = r[dt_idx] if dt_idx is not None else ""
            lines = [f"{s} {p} {o} .\n" for o in object_terms(r[h.node2], ns, dt)]
            edge_id = r[h.id] if h.id is not None else ""
            if edge_id and quals:
                e = _node_term(edge_id, ns, "id")
                for i in quals:
                    lines.extend(f"{e} {qual_preds[i]} {o} .\n" for o in object_terms(r[i], ns))
        except (NonSymbolSubject, UnexpandablePrefix, MalformedValue) as err:
            if not lenient:
                raise type(err)(f"line {n}: {err}") if not isinstance(err, MalformedValue) else err
            log.warning("line %d skipped: %s", n, err)
            continue
        yield from lines


def write_ntriples(lines: Iterable[str], sink="-") -> int:
    fh = sys.stdout if sink in ("-", None) else open(sink, "w", encoding="utf-8", newline="\n")
    count = 0
    try:
        buf = []
        for line in lines:
            buf.append(line)
            count += 1
            if len(buf) >= 4096:
                fh.write("".join(buf))
                buf = []
        fh.write("".join(buf))
        fh.flush()
    finally:
        if fh is not sys.stdout:
            fh.close()
    return count


# -- ConceptNet ------------------------------------------------------------------

CONCEPTNET_COLUMNS = ("node1", "label", "node2", "id")


def import_conceptnet(source="-", english_only: bool = False,
                      report: Optional[ImportReport] = None) -> EdgeStream:
    """Read the tab-separated assertion dump: uri, relation, start, end, metadata."""
    report = report if report is not None else ImportReport()
    fh, owned = _open_lines(source)

    def sym(text):
        return serialize_value(Symbol(text))

    def gen():
        out = []
        try:
            for n, line in enumerate(fh, 1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                report.read += 1
                parts = line.split("\t")
                if len(parts) != 5 or not all(parts[:4]) or any(c.isspace() for c in "".join(parts[:4])):
                    msg = f"line {n}: expected 5 tab-separated columns with non-empty uri, relation, start, end"
                    log.warning("%s", MalformedRow(msg))
                    report.errors.append(msg)
                    continue
                uri, rel, start, end = parts[:4]
                if english_only and not (start.startswith("/c/en/") and end.startswith("/c/en/")):
                    continue
                out.append([sym(start), sym(rel), sym(end), sym(uri)])
                report.written += 1
                if len(out) >= BATCH_ROWS:
                    yield out
                    out = []
            if out:
                yield out
        finally:
            if owned:
                fh.close()

    return EdgeStream(resolve_header(CONCEPTNET_COLUMNS), gen(), str(source))


# -- property graph --------------------------------------------------------------

def export_property_graph(stream: EdgeStream, nodes_sink, edges_sink,
                          label_properties: Sequence[str] = ("label", "rdfs:label")) -> Tuple[int, int]:
    """Write a nodes file (id, label) and an edges file (id, node1, label, node2,
    qualifiers...). Edges whose label is a label property become node labels."""
    h = stream.header
    label_props = set(label_properties)
    extras = list(h.extra_indices)
    width = len(h.columns)
    nodes: Dict[str, List[str]] = {}
    n_edges = 0
    own = not hasattr(edges_sink, "write")
    efh = open(edges_sink, "w", encoding="utf-8", newline="\n") if own else edges_sink
    try:
        efh.write("\t".join(["id", "node1", "label", "node2"] + [h.columns[i] for i in extras]) + "\n")
        for batch in stream.batches():
            buf = []
            for r in batch:
                if len(r) < width:
                    r = r + [""] * (width - len(r))
                a, lab, b = r[h.node1], r[h.label], r[h.node2]
                if a and a not in nodes:
                    nodes[a] = []
                if lab in label_props:
                    if a and b:
                        nodes[a].append(b)
                    continue
                if b and value_kind(b) is Kind.SYMBOL and b not in nodes:
                    nodes[b] = []
                eid = r[h.id] if h.id is not None else ""
                buf.append("\t".join([eid, a, lab, b] + [r[i] for i in extras]) + "\n")
            efh.write("".join(buf))
            n_edges += len(buf)
    finally:
        if own:
            efh.close()
    own = not hasattr(nodes_sink, "write")
    nfh = open(nodes_sink, "w", encoding="utf-8", newline="\n") if own else nodes_sink
    try:
        nfh.write("id\tlabel\n")
        for node, labels in nodes.items():
            labels = list(dict.fromkeys(labels))
            nfh.write(f"{node}\t{'|'.join(labels)}\n")
    finally:
        if own:
            nfh.close()
    return len(nodes), n_edges
