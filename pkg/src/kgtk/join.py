"""Sort-merge join of two edge streams."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

from .edges import BATCH_ROWS, EdgeStream, Header
from .errors import JoinGroupTooLarge, KeyArityMismatch, UnsortedInput
from .extsort import SortKey, SortResources, sort_edges

JOIN_TYPES = ("inner", "left", "right", "full")
DEFAULT_GROUP_CAP = 1_000_000


@dataclass(frozen=True)
class JoinSpec:
    join_type: str = "inner"
    left_keys: Optional[Tuple[str, ...]] = None
    right_keys: Optional[Tuple[str, ...]] = None
    join_on_id: bool = False
    join_on_label: bool = False
    join_on_node2: bool = False
    right_prefix: str = "right."
    presort: bool = False
    group_cap: int = DEFAULT_GROUP_CAP

    def __post_init__(self):
        if self.join_type not in JOIN_TYPES:
            raise ValueError(f"join type must be one of {', '.join(JOIN_TYPES)}")

    def key_columns(self) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
        if self.left_keys or self.right_keys:
            left = tuple(self.left_keys or self.right_keys)
            right = tuple(self.right_keys or self.left_keys)
        else:
            base = ["id"] if self.join_on_id else ["node1"]
            if self.join_on_label:
                base.append("label")
            if self.join_on_node2:
                base.append("node2")
            left = right = tuple(base)
        if len(left) != len(right) or not left:
            raise KeyArityMismatch(f"left keys {list(left)} and right keys {list(right)} differ in length")
        return left, right


def join_header(left: Header, right: Header, right_key_idx: Sequence[int], prefix: str):
    """Output header and the right-side column indices that are carried over."""
    names = list(left.columns)
    taken = set(names)
    carried = []
    for i, name in enumerate(right.columns):
        if i in right_key_idx:
            continue
        out = name
        if out in taken:
            out = prefix + name
            n = 2
            while out in taken:
                out = f"{prefix}{name}.{n}"
                n += 1
        taken.add(out)
        names.append(out)
        carried.append(i)
    return Header(tuple(names), left.node1, left.label, left.node2, left.id), carried


def _groups(rows: Iterator[List[str]], key_idx, width, side, cap) -> Iterator[tuple]:
    """Yield (key, [rows]) for runs of equal keys; raises on unsorted input."""
    prev = None
    group: List[List[str]] = []
    for r in rows:
        if len(r) < width:
            r = r + [""] * (width - len(r))
        k = tuple(r[i] for i in key_idx)
        if prev is not None and k != prev:
            if k < prev:
                raise UnsortedInput(
                    f"{side} input is not sorted on its join keys ({list(prev)} before {list(k)}); "
                    "sort it first or use --presort")
            yield prev, group
            group = []
        prev = k
        group.append(r)
        if len(group) > cap:
            raise JoinGroupTooLarge(f"more than {cap} {side} rows share join key {list(k)}")
    if group:
        yield prev, group


def join(left: EdgeStream, right: EdgeStream, spec: JoinSpec = JoinSpec(),
         sort_resources: Optional[SortResources] = None) -> EdgeStream:
    lkeys, rkeys = spec.key_columns()
    lh, rh = left.header, right.header
    lidx = [lh.index_of(c) for c in lkeys]
    ridx = [rh.index_of(c) for c in rkeys]
    if spec.presort:
        left = sort_edges(left, SortKey(tuple(lh.columns[i] for i in lidx)), sort_resources)
        right = sort_edges(right, SortKey(tuple(rh.columns[i] for i in ridx)), sort_resources)
    header, carried = join_header(lh, rh, set(ridx), spec.right_prefix)
    lw, rw = len(lh.columns), len(rh.columns)
    keep_left = spec.join_type in ("left", "full")
    keep_right = spec.join_type in ("right", "full")
    empty_right = [""] * len(carried)

    def right_only(r):
        row = [""] * lw
        for li, ri in zip(lidx, ridx):
            row[li] = r[ri]
        return row + [r[i] for i in carried]

    def gen():
        lg = _groups(left.rows(), lidx, lw, "left", spec.group_cap)
        rg = _groups(right.rows(), ridx, rw, "right", spec.group_cap)
        lcur = next(lg, None)
        rcur = next(rg, None)
        out = []
        while lcur is not None or rcur is not None:
            if rcur is None or (lcur is not None and lcur[0] < rcur[0]):
                if keep_left:
                    out.extend(r[:lw] + empty_right for r in lcur[1])
                lcur = next(lg, None)
            elif lcur is None or rcur[0] < lcur[0]:
                if keep_right:
                    out.extend(right_only(r) for r in rcur[1])
                rcur = next(rg, None)
            else:
                rparts = [[r[i] for i in carried] for r in rcur[1]]
                for lrow in lcur[1]:
                    base = lrow[:lw]
                    out.extend(base + rp for rp in rparts)
                lcur = next(lg, None)
                rcur = next(rg, None)
            if len(out) >= BATCH_ROWS:
                yield out
                out = []
        if out:
            yield out

    return EdgeStream(header, gen(), f"join({left.source},{right.source})")
