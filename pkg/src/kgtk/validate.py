"""Conformance checking (validate) and repair (clean) of edge streams."""
from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from . import kernels
from .edges import EdgeStream, Header
from .errors import AbortOnFirstError, MalformedValue
from .values import (Kind, canonical_text, date_fields, date_problem, days_in_month,
                     parse_value, serialize_value, DateTime)

DEFAULT_MAX_LENGTH = 32768
DEFAULT_MIN_LENGTH = 0
DEFAULT_EXEMPLARS = 10


@dataclass(frozen=True)
class ValidationRule:
    rule_id: str
    scope: str              # header | line | value
    severity: str = "error"  # error | warning
    action: str = "report"  # report | exclude | fix | abort
    description: str = ""
    check: Optional[Callable] = None  # custom line check: (row, header) -> iterable of (column, message)

    def __post_init__(self):
        if self.scope not in ("header", "line", "value"):
            raise ValueError(f"bad scope {self.scope!r}")
        if self.action not in ("report", "exclude", "fix", "abort"):
            raise ValueError(f"bad action {self.action!r}")


BUILTIN_RULES = (
    ValidationRule("cell_count", "line", description="row has a different number of cells than the header"),
    ValidationRule("empty_required", "line", description="node1, label or node2 is empty"),
    ValidationRule("value_length", "value", description="value shorter or longer than the configured bounds"),
    ValidationRule("quotation", "value", description="badly quoted or escaped string"),
    ValidationRule("language_tag", "value", description="invalid language tag"),
    ValidationRule("date", "value", description="invalid date or time"),
    ValidationRule("coordinates", "value", description="malformed or out-of-range coordinates"),
    ValidationRule("number", "value", description="malformed number or quantity"),
    ValidationRule("list", "value", description="malformed list"),
    ValidationRule("symbol", "value", description="whitespace inside a symbol"),
    ValidationRule("id_not_symbol", "value", description="edge id is not a symbol"),
)

_KIND_TO_RULE = {
    "string": "quotation",
    "lang_string": "quotation",
    "cell": "quotation",
    "language_tag": "language_tag",
    "date_time": "date",
    "coordinates": "coordinates",
    "number": "number",
    "quantity": "number",
    "list": "list",
    "symbol": "symbol",
}


def default_rules() -> Tuple[ValidationRule, ...]:
    return BUILTIN_RULES


@dataclass(frozen=True)
class Finding:
    rule_id: str
    line_number: int
    column: str
    message: str

    def __str__(self):
        return f"line {self.line_number}, column {self.column}: [{self.rule_id}] {self.message}"


@dataclass
class ValidationReport:
    counts: Counter = field(default_factory=Counter)
    fixes: Counter = field(default_factory=Counter)
    exemplars: List[Finding] = field(default_factory=list)
    rows_read: int = 0
    rows_passed: int = 0
    rows_excluded: int = 0
    rows_fixed: int = 0
    max_exemplars: int = DEFAULT_EXEMPLARS
    finished: bool = False

    @property
    def total_findings(self) -> int:
        return sum(self.counts.values())

    def record(self, finding: Finding):
        self.counts[finding.rule_id] += 1
        if len(self.exemplars) < self.max_exemplars:
            self.exemplars.append(finding)

    def to_text(self, title: str = "validate") -> str:
        out = io.StringIO()
        out.write(f"{title}: read {self.rows_read}, passed {self.rows_passed}, "
                  f"excluded {self.rows_excluded}, fixed {self.rows_fixed}\n")
        for rule, n in sorted(self.counts.items()):
            out.write(f"  {rule}: {n}\n")
        for kind, n in sorted(self.fixes.items()):
            out.write(f"  fixed {kind}: {n}\n")
        for f in self.exemplars:
            out.write(f"  {f}\n")
        return out.getvalue()

    def to_tsv(self) -> str:
        lines = ["metric\tvalue"]
        for key in ("rows_read", "rows_passed", "rows_excluded", "rows_fixed"):
            lines.append(f"{key}\t{getattr(self, key)}")
        for rule, n in sorted(self.counts.items()):
            lines.append(f"finding:{rule}\t{n}")
        for kind, n in sorted(self.fixes.items()):
            lines.append(f"fix:{kind}\t{n}")
        return "\n".join(lines) + "\n"


class RowChecker:
    """Evaluates the enabled rules on one row."""

    def __init__(self, header: Header, rules: Optional[Sequence[ValidationRule]] = None,
                 max_length: int = DEFAULT_MAX_LENGTH, min_length: int = DEFAULT_MIN_LENGTH):
        self.header = header
        self.rules = tuple(rules) if rules is not None else BUILTIN_RULES
        self.enabled = {r.rule_id for r in self.rules}
        self.custom = [r for r in self.rules if r.check is not None]
        self.max_length = max_length
        self.min_length = min_length
        self.ncols = len(header.columns)
        self.required = header.role_indices
        self.id_idx = header.id

    def check(self, row: Sequence[str]) -> List[Tuple[str, str, str]]:
        """(rule_id, column, message) for every problem found."""
        found = []
        on = self.enabled
        cols = self.header.columns
        if len(row) != self.ncols and "cell_count" in on:
            found.append(("cell_count", "*", f"{len(row)} cells, expected {self.ncols}"))
        if "empty_required" in on:
            for idx in self.required:
                if idx >= len(row) or not row[idx]:
                    found.append(("empty_required", cols[idx], "required value is empty"))
        value_kind = kernels.value_kind
        check_len = "value_length" in on
        for idx, cell in enumerate(row):
            name = cols[idx] if idx < len(cols) else f"#{idx + 1}"
            if check_len and cell and not (self.min_length <= len(cell) <= self.max_length):
                found.append(("value_length", name, f"length {len(cell)} outside "
                              f"[{self.min_length}, {self.max_length}]"))
            kind = value_kind(cell)
            if kind is Kind.MALFORMED:
                try:
                    parse_value(cell)
                    rule, msg = "quotation", "unparseable value"
                except MalformedValue as e:
                    rule, msg = _KIND_TO_RULE.get(e.kind, "quotation"), e.message
                if rule in on:
                    found.append((rule, name, msg))
            elif idx == self.id_idx and cell and kind is not Kind.SYMBOL and "id_not_symbol" in on:
                found.append(("id_not_symbol", name, f"id is a {kind.value}, not a symbol"))
        for rule in self.custom:
            for column, msg in rule.check(row, self.header) or ():
                found.append((rule.rule_id, column, msg))
        return found


def validate(stream: EdgeStream, rules: Optional[Sequence[ValidationRule]] = None,
             on_error: str = "report", max_length: int = DEFAULT_MAX_LENGTH,
             min_length: int = DEFAULT_MIN_LENGTH,
             max_exemplars: int = DEFAULT_EXEMPLARS) -> Tuple[EdgeStream, ValidationReport]:
    """Check every row. Rows are never modified.

    ``report`` passes all rows and only counts findings, ``exclude`` drops
    rows with error-severity findings, ``abort`` raises on the first one.
    The report fills in as the returned stream is consumed.
    """
    if on_error not in ("report", "exclude", "abort"):
        raise ValueError(f"unknown on_error {on_error!r}")
    checker = RowChecker(stream.header, rules, max_length, min_length)
    severity = {r.rule_id: r.severity for r in checker.rules}
    report = ValidationReport(max_exemplars=max_exemplars)

    def gen():
        line = 1
        for batch in stream.batches():
            out = []
            for row in batch:
                line += 1
                report.rows_read += 1
                problems = checker.check(row)
                fatal = False
                for rule_id, column, msg in problems:
                    finding = Finding(rule_id, line, column, msg)
                    report.record(finding)
                    if severity.get(rule_id, "error") == "error":
                        if on_error == "abort":
                            raise AbortOnFirstError(finding)
                        fatal = True
                if fatal and on_error == "exclude":
                    report.rows_excluded += 1
                else:
                    report.rows_passed += 1
                    out.append(row)
            if out:
                yield out
        report.finished = True

    return EdgeStream(stream.header, gen(), stream.source), report


# -- clean ------------------------------------------------------------------------

DATE_POLICIES = ("clamp", "zero", "drop")

_DATE_BOUNDS = {"month": (0, 12), "hour": (0, 23), "minute": (0, 59),
                "second": (0, 59), "precision": (0, 15)}


def repair_date(text: str, policy: str) -> Optional[str]:
    """Apply the invalid-date policy; None when the date cannot be repaired."""
    if policy == "drop":
        return None
    fields = date_fields(text)
    if fields is None:
        return None
    for _ in range(8):
        problem = date_problem(**fields)
        if problem is None:
            return serialize_value(DateTime(**fields))
        comp = problem[0]
        if comp == "tz":
            return None
        if comp == "day":
            if policy == "zero" or fields["month"] == 0:
                fields["day"] = 0
            else:
                hi = days_in_month(fields["year"], fields["month"])
                fields["day"] = min(max(fields["day"], 0), hi)
        elif policy == "zero":
            fields[comp] = 0
        else:
            lo, hi = _DATE_BOUNDS[comp]
            fields[comp] = min(max(fields[comp], lo), hi)
    return None


def escape_stray_pipes(cell: str) -> str:
    """Escape unescaped ``|`` inside a quoted string or language string."""
    if len(cell) < 2 or "|" not in cell:
        return cell
    if cell[0] == '"' and cell[-1] == '"':
        body, tail = cell[1:-1], '"'
        head = '"'
    elif cell[0] == "'":
        end = cell.rfind("'@")
        if end <= 0:
            return cell
        head, body, tail = "'", cell[1:end], cell[end:]
    else:
        return cell
    out, i, n = [], 0, len(body)
    while i < n:
        c = body[i]
        if c == "\\" and i + 1 < n:
            out.append(body[i:i + 2])
            i += 2
            continue
        out.append("\\|" if c == "|" else c)
        i += 1
    return head + "".join(out) + tail


_NORMALIZED_KINDS = frozenset({Kind.NUMBER, Kind.QUANTITY, Kind.COORDINATES,
                               Kind.DATE_TIME, Kind.LANG_STRING, Kind.LIST})


def clean_cell(cell: str, date_policy: str, fixes: Counter) -> str:
    """Escape pipes, normalize literal forms, repair dates; may stay malformed."""
    if not cell:
        return cell
    kind = kernels.value_kind(cell)
    if kind is Kind.MALFORMED:
        escaped = escape_stray_pipes(cell)
        if escaped != cell and kernels.value_kind(escaped) is not Kind.MALFORMED:
            fixes["pipe_escape"] += 1
            cell = escaped
            kind = kernels.value_kind(cell)
    if kind is Kind.MALFORMED and cell[0] == "^":
        repaired = repair_date(cell, date_policy)
        if repaired is not None:
            fixes["date_" + date_policy] += 1
            return repaired
        return cell
    if kind in _NORMALIZED_KINDS:
        canon = canonical_text(cell)
        if canon != cell:
            fixes["normalize_" + kind.value] += 1
        return canon
    return cell


def clean(stream: EdgeStream, date_policy: str = "drop", rules: Optional[Sequence[ValidationRule]] = None,
          max_length: int = DEFAULT_MAX_LENGTH, min_length: int = DEFAULT_MIN_LENGTH,
          max_exemplars: int = DEFAULT_EXEMPLARS) -> Tuple[EdgeStream, ValidationReport]:
    """Repair what can be repaired and drop the rest.

    Fixes run in a fixed order: trailing empty cells beyond the header are
    trimmed, stray pipes inside quoted strings are escaped, quantities,
    numbers, coordinates, dates and language tags are rewritten canonically,
    invalid dates go through ``date_policy`` (clamp, zero or drop). Rows that
    still fail any rule are excluded.
    """
    if date_policy not in DATE_POLICIES:
        raise ValueError(f"unknown date policy {date_policy!r}")
    header = stream.header
    checker = RowChecker(header, rules, max_length, min_length)
    report = ValidationReport(max_exemplars=max_exemplars)
    ncols = len(header.columns)

    def gen():
        line = 1
        for batch in stream.batches():
            out = []
            for row in batch:
                line += 1
                report.rows_read += 1
                changed = False
                if len(row) > ncols and not any(row[ncols:]):
                    row = row[:ncols]
                    report.fixes["trailing_cells"] += 1
                    changed = True
                fixed = []
                for cell in row:
                    new = clean_cell(cell, date_policy, report.fixes)
                    if new != cell:
                        changed = True
                    fixed.append(new)
                problems = checker.check(fixed)
                if problems:
                    for rule_id, column, msg in problems:
                        report.record(Finding(rule_id, line, column, msg))
                    report.rows_excluded += 1
                    continue
                report.rows_passed += 1
                if changed:
                    report.rows_fixed += 1
                out.append(fixed)
            if out:
                yield out
        report.finished = True

    return EdgeStream(header, gen(), stream.source), report
