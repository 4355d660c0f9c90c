"""Reading and writing KGTK edge files.

A file is UTF-8 text. The first line names the columns; every following
line is one edge whose cells are separated by single tabs. Rows travel
through the library as plain lists of cell strings grouped in batches, so
that streaming operators never pay for per-cell parsing they do not need.
"""
from __future__ import annotations

import hashlib
import io
import logging
import os
import sys
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, List, Optional, Sequence

from . import kernels
from .errors import (AmbiguousAlias, DuplicateColumn, EmptyInput, IoFailure,
                     MissingRequiredColumn, RaggedRow, UnknownColumn)
from .values import KgtkValue, Symbol, parse_value, serialize_value

log = logging.getLogger(__name__)

NODE1, LABEL, NODE2, ID = "node1", "label", "node2", "id"
REQUIRED = (NODE1, LABEL, NODE2)

DEFAULT_ALIASES = {
    NODE1: ("from", "subject"),
    LABEL: ("predicate", "relation"),
    NODE2: ("to", "object"),
    ID: (),
}

READ_CHUNK_BYTES = 1 << 16
BATCH_ROWS = 1024

Row = List[str]


@dataclass(frozen=True)
class Header:
    columns: tuple
    node1: int
    label: int
    node2: int
    id: Optional[int] = None

    def __len__(self):
        return len(self.columns)

    @property
    def role_indices(self) -> tuple:
        return (self.node1, self.label, self.node2)

    @property
    def extras(self) -> tuple:
        taken = {self.node1, self.label, self.node2, self.id}
        return tuple(c for i, c in enumerate(self.columns) if i not in taken)

    @property
    def extra_indices(self) -> tuple:
        taken = {self.node1, self.label, self.node2, self.id}
        return tuple(i for i in range(len(self.columns)) if i not in taken)

    def role_of(self, index: int) -> Optional[str]:
        for role in (NODE1, LABEL, NODE2, ID):
            if getattr(self, role) == index:
                return role
        return None

    def index_of(self, selector: str) -> int:
        """Resolve a column by name, by role name, or by 1-based position."""
        if selector in self.columns:
            return self.columns.index(selector)
        if selector in (NODE1, LABEL, NODE2, ID):
            idx = getattr(self, selector)
            if idx is not None:
                return idx
        if selector.isdigit():
            pos = int(selector)
            if 1 <= pos <= len(self.columns):
                return pos - 1
        raise UnknownColumn(f"unknown column {selector!r} (have {', '.join(self.columns)})")

    def canonical(self) -> "Header":
        cols = list(self.columns)
        for role in (NODE1, LABEL, NODE2, ID):
            idx = getattr(self, role)
            if idx is not None:
                cols[idx] = role
        return resolve_header(cols)

    def line(self) -> str:
        return "\t".join(self.columns) + "\n"


def resolve_header(raw_names: Sequence[str], aliases: Optional[dict] = None) -> Header:
    """Assign the node1/label/node2/id roles to columns.

    Exact role names win over aliases; two alias columns competing for one
    role is an error.
    """
    names = tuple(raw_names)
    if not names:
        raise EmptyInput("empty header line")
    seen = set()
    for n in names:
        if n in seen:
            raise DuplicateColumn(f"duplicate column {n!r}")
        seen.add(n)
    aliases = DEFAULT_ALIASES if aliases is None else {**DEFAULT_ALIASES, **aliases}
    roles = {}
    for role in (NODE1, LABEL, NODE2, ID):
        if role in names:
            roles[role] = names.index(role)
            continue
        hits = [i for i, n in enumerate(names) if n in aliases.get(role, ())]
        if len(hits) > 1:
            raise AmbiguousAlias(
                f"columns {', '.join(names[i] for i in hits)} all map to {role}")
        roles[role] = hits[0] if hits else None
    missing = [r for r in REQUIRED if roles[r] is None]
    if missing:
        raise MissingRequiredColumn(f"missing required column(s): {', '.join(missing)}")
    return Header(names, roles[NODE1], roles[LABEL], roles[NODE2], roles[ID])


class EdgeRecord:
    """One edge. Cells stay raw text until a typed accessor is used."""

    __slots__ = ("header", "cells", "line_number")

    def __init__(self, header: Header, cells: Row, line_number: int):
        self.header = header
        self.cells = cells
        self.line_number = line_number

    def _cell(self, idx):
        return self.cells[idx] if idx is not None and idx < len(self.cells) else ""

    @property
    def node1(self) -> KgtkValue:
        return parse_value(self._cell(self.header.node1))

    @property
    def label(self) -> KgtkValue:
        return parse_value(self._cell(self.header.label))

    @property
    def node2(self) -> KgtkValue:
        return parse_value(self._cell(self.header.node2))

    @property
    def id(self) -> Optional[Symbol]:
        text = self._cell(self.header.id)
        return Symbol(text) if text else None

    @property
    def extras(self) -> tuple:
        return tuple(self._cell(i) for i in self.header.extra_indices)

    def __getitem__(self, column: str) -> str:
        return self._cell(self.header.index_of(column))

    def __repr__(self):
        return f"EdgeRecord(line={self.line_number}, cells={self.cells!r})"


class EdgeStream:
    """A header plus a single-use iterator of row batches."""

    def __init__(self, header: Header, batches: Iterable[List[Row]], source: str = "<memory>",
                 on_close: Optional[Callable[[], None]] = None):
        self.header = header
        self.source = source
        self._batches = iter(batches)
        self._consumed = False
        self._on_close = on_close

    @classmethod
    def from_rows(cls, header, rows: Iterable[Row], source="<memory>", batch_size=BATCH_ROWS):
        if not isinstance(header, Header):
            header = resolve_header(header)
        return cls(header, _batched(rows, batch_size), source)

    def batches(self) -> Iterator[List[Row]]:
        if self._consumed:
            raise RuntimeError(f"edge stream from {self.source} was already consumed")
        self._consumed = True
        try:
            yield from self._batches
        finally:
            self.close()

    def rows(self) -> Iterator[Row]:
        for batch in self.batches():
            yield from batch

    def __iter__(self) -> Iterator[EdgeRecord]:
        header = self.header
        for n, cells in enumerate(self.rows(), 2):
            yield EdgeRecord(header, cells, n)

    def map_batches(self, fn, header: Optional[Header] = None) -> "EdgeStream":
        """New stream whose batches are ``fn(batch)`` (empty results dropped)."""
        def gen():
            for batch in self.batches():
                out = fn(batch)
                if out:
                    yield out
        return EdgeStream(header or self.header, gen(), self.source)

    def close(self):
        if self._on_close is not None:
            cb, self._on_close = self._on_close, None
            cb()

    def collect(self) -> List[Row]:
        return [r for r in self.rows()]


def _batched(rows: Iterable[Row], size: int) -> Iterator[List[Row]]:
    batch = []
    for r in rows:
        batch.append(r)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


# -- reading ------------------------------------------------------------------

def _open_text(source):
    if source == "-" or source is None:
        return io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8", newline="\n"), "<stdin>", False
    if isinstance(source, (str, os.PathLike)):
        try:
            return open(source, encoding="utf-8", newline="\n"), str(source), True
        except OSError as e:
            raise IoFailure(f"cannot open {source}: {e}") from e
    return source, getattr(source, "name", "<stream>"), False


def open_reader(source="-", error_action: str = "defer", column_aliases: Optional[dict] = None,
                chunk_bytes: int = READ_CHUNK_BYTES) -> EdgeStream:
    """Open a KGTK file (path, ``-`` for stdin, or text file object) lazily.

    ``error_action`` decides what happens to rows whose cell count differs
    from the header: ``defer`` passes them on for validate/clean, ``exclude``
    drops them, ``abort`` raises :class:`RaggedRow`.
    """
    if error_action not in ("defer", "exclude", "abort"):
        raise ValueError(f"unknown error action {error_action!r}")
    fh, name, owned = _open_text(source)
    try:
        first = fh.readline()
    except (OSError, UnicodeDecodeError) as e:
        raise IoFailure(f"cannot read {name}: {e}") from e
    if not first:
        if owned:
            fh.close()
        raise EmptyInput(f"{name}: no header line")
    if first.startswith("\ufeff"):
        first = first[1:]
    try:
        header = resolve_header(first.rstrip("\r\n").split("\t"), column_aliases)
    except Exception:
        if owned:
            fh.close()
        raise
    ncols = len(header.columns)

    def gen():
        split = kernels.split_lines
        line_no = 1
        try:
            while True:
                lines = fh.readlines(chunk_bytes)
                if not lines:
                    return
                rows = split(lines)
                if error_action != "defer":
                    kept = []
                    for offset, r in enumerate(rows):
                        if len(r) != ncols:
                            if error_action == "abort":
                                raise RaggedRow(f"{name}:{line_no + offset + 1}: "
                                                f"{len(r)} cells, expected {ncols}")
                            continue
                        kept.append(r)
                    rows = kept
                line_no += len(lines)
                if rows:
                    yield rows
        except (OSError, UnicodeDecodeError) as e:
            raise IoFailure(f"cannot read {name}: {e}") from e

    return EdgeStream(header, gen(), name, on_close=fh.close if owned else None)


# -- writing ------------------------------------------------------------------

@dataclass
class WriteStats:
    rows: int = 0
    bytes: int = 0


def _open_sink(sink):
    if sink == "-" or sink is None:
        return sys.stdout.buffer, False
    if isinstance(sink, (str, os.PathLike)):
        try:
            return open(sink, "wb"), True
        except OSError as e:
            raise IoFailure(f"cannot open {sink} for writing: {e}") from e
    return sink, False


def write_edges(stream: EdgeStream, sink="-", canonical_header: bool = False) -> WriteStats:
    """Write header and rows; returns row and byte counts."""
    fh, owned = _open_sink(sink)
    text_mode = isinstance(fh, io.TextIOBase)
    header = stream.header.canonical() if canonical_header else stream.header
    stats = WriteStats()
    join = kernels.join_rows

    def put(text):
        data = text.encode("utf-8")
        fh.write(text if text_mode else data)
        stats.bytes += len(data)

    try:
        put(header.line())
        for batch in stream.batches():
            put(join(batch))
            stats.rows += len(batch)
        fh.flush()
    except BrokenPipeError:
        raise
    except OSError as e:
        raise IoFailure(f"write failed: {e}") from e
    finally:
        if owned:
            fh.close()
    return stats


def write_records(header, rows: Iterable[Sequence], sink) -> WriteStats:
    """Convenience wrapper: write already-materialized rows (lists of text or values)."""
    def cells(r):
        return [c if isinstance(c, str) else serialize_value(c) for c in r]
    return write_edges(EdgeStream.from_rows(header, (cells(r) for r in rows)), sink)


# -- identifiers --------------------------------------------------------------

def content_digest(cells: Sequence[str]) -> str:
    return hashlib.sha256("\t".join(cells).encode("utf-8")).hexdigest()[:16]


def generate_ids(stream: EdgeStream, mode: str = "sequential", prefix: str = "E",
                 id_column: str = ID) -> EdgeStream:
    """Fill in missing edge ids; existing ids are kept.

    ``sequential`` numbers the id-less rows ``E1, E2, ...`` in stream order.
    ``content_hash`` derives the id from the other cells; repeated digests
    get ``-2``, ``-3``, ... suffixes and are logged as collisions.
    """
    if mode not in ("sequential", "content_hash"):
        raise ValueError(f"unknown id mode {mode!r}")
    header = stream.header
    if header.id is None:
        new_header = resolve_header(header.columns + (id_column,))
        append = True
    else:
        new_header = header
        append = False
    id_idx = new_header.id
    ncols = len(new_header.columns)
    counter = 0
    seen = {}
    collisions = 0

    def fix(batch):
        nonlocal counter, collisions
        out = []
        for r in batch:
            r = list(r)
            if append:
                r.append("")
            if len(r) < ncols:
                r.extend([""] * (ncols - len(r)))
            if not r[id_idx]:
                if mode == "sequential":
                    counter += 1
                    r[id_idx] = f"{prefix}{counter}"
                else:
                    body = [c for i, c in enumerate(r) if i != id_idx]
                    ident = prefix + content_digest(body)
                    n = seen.get(ident, 0) + 1
                    seen[ident] = n
                    if n > 1:
                        collisions += 1
                        log.warning("id collision for %s; using suffix -%d", ident, n)
                        ident = f"{ident}-{n}"
                    r[id_idx] = ident
            out.append(r)
        return out

    return stream.map_batches(fix, new_header)
