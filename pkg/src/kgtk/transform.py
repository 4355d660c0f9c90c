"""Single-pass stream transforms: filter, cat, remove-columns."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence

from . import kernels
from .edges import ID, LABEL, NODE1, NODE2, EdgeStream, Header, resolve_header
from .errors import PatternSyntax, ProtectedColumn, UnknownColumn

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FilterPattern:
    """Allowed node1/label/node2 symbols; ``None`` means any value."""

    subjects: Optional[FrozenSet[str]] = None
    predicates: Optional[FrozenSet[str]] = None
    objects: Optional[FrozenSet[str]] = None

    @property
    def is_identity(self) -> bool:
        return self.subjects is None and self.predicates is None and self.objects is None

    def __and__(self, other: "FilterPattern") -> "FilterPattern":
        def meet(a, b):
            if a is None:
                return b
            if b is None:
                return a
            return a & b
        return FilterPattern(meet(self.subjects, other.subjects),
                             meet(self.predicates, other.predicates),
                             meet(self.objects, other.objects))

    def matches(self, node1: str, label: str, node2: str) -> bool:
        return ((self.subjects is None or node1 in self.subjects)
                and (self.predicates is None or label in self.predicates)
                and (self.objects is None or node2 in self.objects))


def parse_pattern(text: str) -> FilterPattern:
    """Parse ``"subjects ; predicates ; objects"``, each a comma list or blank."""
    parts = text.split(";")
    if len(parts) != 3:
        raise PatternSyntax(f"pattern needs exactly two ';' separators, got {len(parts) - 1}: {text!r}")
    sets = []
    for part in parts:
        items = [s.strip() for s in part.split(",")]
        items = [s for s in items if s]
        sets.append(frozenset(items) if items else None)
    return FilterPattern(*sets)


def filter_edges(stream: EdgeStream, pattern: FilterPattern) -> EdgeStream:
    if pattern.is_identity:
        log.info("filter pattern matches everything")
        return stream
    h = stream.header
    i1, i2, i3 = h.node1, h.label, h.node2
    s1, s2, s3 = pattern.subjects, pattern.predicates, pattern.objects
    kern = kernels.filter_rows
    return stream.map_batches(lambda batch: kern(batch, i1, i2, i3, s1, s2, s3))


# -- cat ----------------------------------------------------------------------------

def _column_key(header: Header, idx: int):
    role = header.role_of(idx)
    return ("role", role) if role else ("name", header.columns[idx])


def cat_header(headers: Sequence[Header]) -> tuple:
    """Union header plus, per input, the output position of each of its columns."""
    first = headers[0]
    names = {}
    order = [("role", NODE1), ("role", LABEL), ("role", NODE2)]
    for role in (NODE1, LABEL, NODE2):
        names[("role", role)] = first.columns[getattr(first, role)]
    for h in headers:
        for idx in range(len(h.columns)):
            key = _column_key(h, idx)
            if key not in names:
                names[key] = h.columns[idx]
                order.append(key)
    columns = [names[k] for k in order]
    position = {k: i for i, k in enumerate(order)}
    id_pos = position.get(("role", ID))
    out = Header(tuple(columns), 0, 1, 2, id_pos)
    if len(set(columns)) != len(columns):
        # an extra column shares its name with a role column of another file
        out = resolve_header(columns)
    maps = [[position[_column_key(h, i)] for i in range(len(h.columns))] for h in headers]
    return out, maps


def cat(streams: Sequence[EdgeStream]) -> EdgeStream:
    """Concatenate streams under the union of their columns."""
    if not streams:
        raise ValueError("cat needs at least one input")
    header, maps = cat_header([s.header for s in streams])
    width = len(header.columns)

    def gen():
        for s, m in zip(streams, maps):
            identity = m == list(range(width))
            for batch in s.batches():
                if identity:
                    yield batch
                    continue
                out = []
                for r in batch:
                    row = [""] * width
                    for i, c in enumerate(r[:len(m)]):
                        row[m[i]] = c
                    out.append(row)
                yield out

    return EdgeStream(header, gen(), ",".join(s.source for s in streams))


# -- remove-columns ---------------------------------------------------------------

def remove_columns(stream: EdgeStream, columns: Iterable[str], strict: bool = False) -> EdgeStream:
    """Drop columns by name; node1, label and node2 are protected."""
    h = stream.header
    drop = set()
    for name in columns:
        name = name.strip()
        if not name:
            continue
        try:
            idx = h.index_of(name)
        except UnknownColumn:
            if strict:
                raise
            log.warning("remove-columns: no column named %r", name)
            continue
        if idx in h.role_indices:
            raise ProtectedColumn(f"column {h.columns[idx]!r} ({h.role_of(idx)}) cannot be removed")
        drop.add(idx)
    if not drop:
        return stream
    keep = [i for i in range(len(h.columns)) if i not in drop]
    new_cols = [h.columns[i] for i in keep]
    new_id = keep.index(h.id) if h.id is not None and h.id in keep else None
    header = Header(tuple(new_cols), keep.index(h.node1), keep.index(h.label),
                    keep.index(h.node2), new_id)

    def project(batch: List[List[str]]):
        n = len(h.columns)
        return [[r[i] for i in keep] if len(r) == n else [r[i] if i < len(r) else "" for i in keep]
                for r in batch]

    return stream.map_batches(project, header)
