"""Node lexicalization and sentence embeddings.

Each node that has edges under one of the configured properties is turned
into a sentence::

    {label}, {descriptions} is a {isa}, and has {has}, and has {prop value}

Absent slots drop out together with their connective. Sentences are then
encoded by a named encoder; ``baseline`` is a deterministic signed feature
hasher, ``external`` pipes sentences through a user command.
"""
from __future__ import annotations

import logging
import math
import re
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import kernels
from .edges import EdgeStream
from .errors import EncoderFailure, UnknownEncoder
from .values import display_text

log = logging.getLogger(__name__)

SIGN_BASIS = 0x84222325CBF29CE4
_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class LexicalizationConfig:
    label_properties: Tuple[str, ...] = ()
    description_properties: Tuple[str, ...] = ()
    isa_properties: Tuple[str, ...] = ()
    has_properties: Tuple[str, ...] = ()
    property_value_properties: Tuple[str, ...] = ()

    def __post_init__(self):
        if not any(self.slots()):
            raise ValueError("at least one property list must be non-empty")

    def slots(self):
        return (self.label_properties, self.description_properties, self.isa_properties,
                self.has_properties, self.property_value_properties)

    def all_properties(self) -> frozenset:
        return frozenset(p for slot in self.slots() for p in slot)


@dataclass(frozen=True)
class SentenceRecord:
    node: str
    sentence: str


@dataclass(frozen=True)
class EmbeddingRecord:
    node: str
    vector: Tuple[float, ...]


def _dedupe(items: Iterable[str]) -> List[str]:
    seen = set()
    out = []
    for it in items:
        if it and it not in seen:
            seen.add(it)
            out.append(it)
    return out


def render_sentence(label: str, descriptions: Sequence[str], isa: Sequence[str],
                    has: Sequence[str], property_values: Sequence[Tuple[str, str]]) -> str:
    head = label
    if descriptions:
        desc = ", ".join(descriptions)
        head = f"{head}, {desc}" if head else desc
    clauses = []
    if isa:
        clauses.append("is a " + ", ".join(isa))
    if has:
        clauses.append("has " + ", ".join(has))
    if property_values:
        clauses.append("has " + ", ".join(f"{p} {v}" for p, v in property_values))
    body = ", and ".join(clauses)
    if head and body:
        return f"{head} {body}"
    return head or body


class Lexicalizer:
    """Collects the configured edges of a stream, then renders one sentence per node."""

    def __init__(self, config: LexicalizationConfig):
        self.config = config
        self.labels: Dict[str, str] = {}
        self.edges: Dict[str, List[Tuple[str, str]]] = {}

    def add_edge(self, node1: str, label: str, node2: str):
        cfg = self.config
        if label not in cfg.all_properties():
            return
        if label in cfg.label_properties and node1 not in self.labels:
            self.labels[node1] = display_text(node2)
        self.edges.setdefault(node1, []).append((label, node2))

    def consume(self, stream: EdgeStream):
        h = stream.header
        i1, il, i2 = h.node1, h.label, h.node2
        wanted = self.config.all_properties()
        need = max(i1, il, i2) + 1
        for batch in stream.batches():
            for r in batch:
                if len(r) >= need and r[il] in wanted:
                    self.add_edge(r[i1], r[il], r[i2])
        return self

    def name_of(self, symbol: str) -> str:
        return self.labels.get(symbol) or display_text(symbol)

    def lexicalize(self, node: str) -> SentenceRecord:
        cfg = self.config
        edges = self.edges.get(node, [])
        if not edges:
            return SentenceRecord(node, "")
        label = self.labels.get(node, "")
        desc, isa, has, pv = [], [], [], []
        for prop, obj in edges:
            if prop in cfg.description_properties:
                desc.append(display_text(obj))
            if prop in cfg.isa_properties:
                isa.append(self.name_of(obj))
            if prop in cfg.has_properties:
                has.append(self.name_of(prop))
            if prop in cfg.property_value_properties:
                pv.append((self.name_of(prop), self.name_of(obj)))
        desc, isa, has = _dedupe(desc), _dedupe(isa), _dedupe(has)
        pv = list(dict.fromkeys(pv))
        if not label and (desc or isa or has or pv):
            label = display_text(node)
        return SentenceRecord(node, render_sentence(label, desc, isa, has, pv))

    def sentences(self) -> Iterator[SentenceRecord]:
        for node in self.edges:
            yield self.lexicalize(node)


def lexicalize(node: str, neighborhood: Iterable[Tuple[str, str, str]],
               config: LexicalizationConfig, label_edges: Iterable[Tuple[str, str, str]] = ()) -> SentenceRecord:
    """Sentence for ``node`` from its (node1, label, node2) edges plus label
    edges of the objects it mentions."""
    lex = Lexicalizer(config)
    for e in label_edges:
        lex.add_edge(*e)
    for e in neighborhood:
        lex.add_edge(*e)
    return lex.lexicalize(node)


def lexicalize_stream(stream: EdgeStream, config: LexicalizationConfig) -> List[SentenceRecord]:
    return list(Lexicalizer(config).consume(stream).sentences())


# -- encoders -----------------------------------------------------------------------

def tokenize(sentence: str) -> List[str]:
    return _TOKEN_RE.findall(sentence.lower())


def baseline_encoder(sentence: str, dim: int) -> List[float]:
    """Signed feature hashing of lower-cased alphanumeric tokens, L2-normalized."""
    if dim < 8:
        raise ValueError("dimension must be at least 8")
    vec = [0.0] * dim
    for idx, sign in kernels.hash_tokens(tokenize(sentence), dim, SIGN_BASIS):
        vec[idx] += sign
    norm = math.sqrt(sum(v * v for v in vec))
    if norm == 0.0:
        return vec
    return [v / norm for v in vec]


class BaselineEncoder:
    name = "baseline"

    def encode(self, sentences: Sequence[str], dim: int) -> List[Optional[List[float]]]:
        return [baseline_encoder(s, dim) for s in sentences]


class ExternalEncoder:
    """Runs ``command`` once per batch: sentences one per line on stdin,
    one line of space-separated floats per sentence on stdout."""

    name = "external"

    def __init__(self, command: str, timeout: Optional[float] = None):
        if not command:
            raise UnknownEncoder("the external encoder needs --encoder-command")
        self.argv = shlex.split(command)
        self.timeout = timeout

    def encode(self, sentences: Sequence[str], dim: int) -> List[Optional[List[float]]]:
        payload = "".join(s.replace("\n", " ") + "\n" for s in sentences)
        try:
            proc = subprocess.run(self.argv, input=payload, capture_output=True, text=True,
                                  timeout=self.timeout, check=True)
        except (OSError, subprocess.SubprocessError) as e:
            raise EncoderFailure(f"encoder command failed: {e}") from e
        lines = proc.stdout.splitlines()
        out: List[Optional[List[float]]] = []
        for i in range(len(sentences)):
            try:
                vec = [float(x) for x in lines[i].split()]
            except (IndexError, ValueError):
                vec = None
            out.append(vec if vec is not None and len(vec) == dim else None)
        return out


ENCODERS: Dict[str, Callable[..., object]] = {
    "baseline": lambda **kw: BaselineEncoder(),
    "external": lambda command=None, **kw: ExternalEncoder(command),
}


def register_encoder(name: str, factory: Callable[..., object]):
    ENCODERS[name] = factory


def get_encoder(name: str, **options):
    try:
        factory = ENCODERS[name]
    except KeyError:
        raise UnknownEncoder(f"unknown encoder {name!r} (have {', '.join(sorted(ENCODERS))})") from None
    return factory(**options)


@dataclass
class EmbedReport:
    embedded: int = 0
    empty: List[str] = field(default_factory=list)
    failed: List[str] = field(default_factory=list)


def embed(sentences: Iterable[SentenceRecord], encoder, dimension: int,
          report: Optional[EmbedReport] = None, batch_size: int = 256) -> Iterator[EmbeddingRecord]:
    """One vector per non-empty sentence, in input order."""
    report = report if report is not None else EmbedReport()
    pending: List[SentenceRecord] = []

    def flush():
        vectors = encoder.encode([p.sentence for p in pending], dimension)
        for rec, vec in zip(pending, vectors):
            if vec is None or len(vec) != dimension or not any(vec):
                log.warning("encoder failed for %s", rec.node)
                report.failed.append(rec.node)
                continue
            report.embedded += 1
            yield EmbeddingRecord(rec.node, tuple(vec))

    for rec in sentences:
        if not rec.sentence:
            report.empty.append(rec.node)
            continue
        pending.append(rec)
        if len(pending) >= batch_size:
            yield from flush()
            pending = []
    if pending:
        yield from flush()
    if report.empty:
        log.info("%d nodes produced an empty sentence and were skipped", len(report.empty))


def format_embedding(rec: EmbeddingRecord) -> str:
    return rec.node + "\t" + " ".join(repr(float(v)) for v in rec.vector) + "\n"


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    return dot / (na * nb) if na and nb else 0.0
