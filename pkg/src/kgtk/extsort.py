"""External merge sort of edge streams.

Rows accumulate in memory until the estimated footprint reaches the run
budget; each full run is sorted and spilled to a temporary file, and the
runs are combined with a k-way heap merge. Equal keys keep their input
order (runs are merged in creation order and heapq.merge breaks ties by
input position).
"""
from __future__ import annotations

import errno
import heapq
import logging
import os
import re
import tempfile
from dataclasses import dataclass, field
from operator import itemgetter
from typing import Callable, Iterator, List, Optional, Sequence

from . import kernels
from .edges import BATCH_ROWS, EdgeStream, Header
from .errors import TempSpaceExhausted, UnknownColumn

log = logging.getLogger(__name__)

DEFAULT_MEMORY = 256 * 1024 * 1024
MAX_FAN_IN = 64
# share of the budget that may hold row objects; the rest covers the sort's
# key array, read buffers and the interpreter itself
RUN_FRACTION = 0.45
_ROW_OVERHEAD = 56 + 64   # list header + key tuple
_CELL_OVERHEAD = 8 + 50   # list slot + str header

_SIZE_RE = re.compile(r"(\d+(?:\.\d+)?)\s*([kKmMgG]?)[bB]?")


def parse_size(text) -> int:
    """``"64M"`` -> 67108864; plain integers are bytes."""
    if isinstance(text, int):
        return text
    m = _SIZE_RE.fullmatch(str(text).strip())
    if not m:
        raise ValueError(f"bad size {text!r}")
    mult = {"": 1, "k": 1 << 10, "m": 1 << 20, "g": 1 << 30}[m.group(2).lower()]
    return int(float(m.group(1)) * mult)


@dataclass(frozen=True)
class SortKey:
    columns: tuple
    descending: tuple = ()
    numeric: frozenset = frozenset()

    @classmethod
    def parse(cls, spec: str, reverse: bool = False, numeric: Sequence[str] = ()) -> "SortKey":
        cols = tuple(c.strip() for c in spec.split(",") if c.strip())
        if not cols:
            raise UnknownColumn("no sort columns given")
        return cls(cols, tuple([reverse] * len(cols)), frozenset(numeric))

    def resolve(self, header: Header) -> List[int]:
        return [header.index_of(c) for c in self.columns]


@dataclass
class SortResources:
    memory_budget: int = DEFAULT_MEMORY
    temp_dir: Optional[str] = None
    run_rows: Optional[int] = None  # force a spill every N rows (testing, tuning)
    stats: dict = field(default_factory=dict)

    def tempdir(self) -> str:
        return self.temp_dir or os.environ.get("KGTK_TMPDIR") or tempfile.gettempdir()


_NUM_PREFIX = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


def _numeric_part(text: str):
    m = _NUM_PREFIX.match(text)
    if m:
        try:
            return (0, float(m.group(0)), text)
        except ValueError:
            pass
    return (1, 0.0, text)


class _Desc:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return other.v < self.v

    def __eq__(self, other):
        return self.v == other.v


def make_key(header: Header, key: SortKey) -> Callable:
    idx = key.resolve(header)
    numeric = {header.index_of(c) for c in key.numeric}
    desc = list(key.descending) or [False] * len(idx)
    if not numeric and not any(desc):
        return itemgetter(*idx) if len(idx) > 1 else itemgetter(idx[0])

    def part(row, i, d):
        v = row[i] if i < len(row) else ""
        if i in numeric:
            v = _numeric_part(v)
        return _Desc(v) if d else v

    def keyfunc(row):
        return tuple(part(row, i, d) for i, d in zip(idx, desc))
    return keyfunc


def _safe(keyfunc, width):
    def k(row):
        if len(row) < width:
            row = row + [""] * (width - len(row))
        return keyfunc(row)
    return k


def _spill(rows, directory) -> str:
    try:
        fd, path = tempfile.mkstemp(prefix="kgtk-sort-", suffix=".tsv", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n", buffering=1 << 20) as fh:
            for start in range(0, len(rows), 4096):
                fh.write(kernels.join_rows(rows[start:start + 4096]))
    except OSError as e:
        if e.errno in (errno.ENOSPC, getattr(errno, "EDQUOT", -1)):
            raise TempSpaceExhausted(f"temporary space exhausted in {directory}") from e
        raise
    return path


def _read_run(path) -> Iterator[List[str]]:
    with open(path, encoding="utf-8", newline="\n", buffering=1 << 16) as fh:
        split = kernels.split_lines
        while True:
            lines = fh.readlines(1 << 16)
            if not lines:
                return
            yield from split(lines)


def _merge_runs(paths, keyfunc, directory) -> List[str]:
    """Reduce the number of runs below MAX_FAN_IN by merging consecutive groups."""
    while len(paths) > MAX_FAN_IN:
        merged = []
        for start in range(0, len(paths), MAX_FAN_IN):
            group = paths[start:start + MAX_FAN_IN]
            if len(group) == 1:
                merged.append(group[0])
                continue
            it = heapq.merge(*[_read_run(p) for p in group], key=keyfunc)
            merged.append(_spill_iter(it, directory))
            for p in group:
                os.unlink(p)
        paths = merged
    return paths


def _spill_iter(rows, directory) -> str:
    buf = []
    fd, path = tempfile.mkstemp(prefix="kgtk-sort-", suffix=".tsv", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n", buffering=1 << 20) as fh:
            for r in rows:
                buf.append(r)
                if len(buf) >= 4096:
                    fh.write(kernels.join_rows(buf))
                    buf = []
            fh.write(kernels.join_rows(buf))
    except OSError as e:
        if e.errno in (errno.ENOSPC, getattr(errno, "EDQUOT", -1)):
            raise TempSpaceExhausted(f"temporary space exhausted in {directory}") from e
        raise
    return path


def sort_edges(stream: EdgeStream, key: SortKey, resources: Optional[SortResources] = None) -> EdgeStream:
    """Stable sort by the key columns (byte-wise unless marked numeric)."""
    res = resources or SortResources()
    header = stream.header
    keyfunc = make_key(header, key)
    width = max(key.resolve(header)) + 1
    safe_key = _safe(keyfunc, width)
    run_budget = max(1, int(res.memory_budget * RUN_FRACTION))

    def sort_run(rows):
        try:
            rows.sort(key=keyfunc)
        except IndexError:
            rows.sort(key=safe_key)

    def gen():
        directory = res.tempdir()
        runs: List[str] = []
        buf: List[List[str]] = []
        used = 0
        try:
            for batch in stream.batches():
                for r in batch:
                    buf.append(r)
                    used += _ROW_OVERHEAD + _CELL_OVERHEAD * len(r) + sum(map(len, r))
                    if used >= run_budget or (res.run_rows and len(buf) >= res.run_rows):
                        sort_run(buf)
                        runs.append(_spill(buf, directory))
                        buf = []
                        used = 0
            res.stats["runs"] = len(runs) + (1 if buf and runs else 0)
            if not runs:
                sort_run(buf)
                for start in range(0, len(buf), BATCH_ROWS):
                    yield buf[start:start + BATCH_ROWS]
                return
            if buf:
                sort_run(buf)
                runs.append(_spill(buf, directory))
                buf = []
            runs[:] = _merge_runs(runs, safe_key, directory)
            out = []
            for r in heapq.merge(*[_read_run(p) for p in runs], key=safe_key):
                out.append(r)
                if len(out) >= BATCH_ROWS:
                    yield out
                    out = []
            if out:
                yield out
        finally:
            for p in runs:
                try:
                    os.unlink(p)
                except OSError:
                    pass

    return EdgeStream(header, gen(), stream.source)


def is_sorted(rows: Sequence[List[str]], keyfunc) -> bool:
    return all(not keyfunc(b) < keyfunc(a) for a, b in zip(rows, rows[1:]))
