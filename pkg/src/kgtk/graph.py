"""In-memory graph index and analytics: reachability, connected components,
degrees, PageRank and HITS."""
from __future__ import annotations

import heapq
import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import kernels
from .edges import EdgeStream, resolve_header
from .errors import GraphTooLarge, NonConvergenceWarning

log = logging.getLogger(__name__)

METRIC_PROPERTIES = {
    "in_degree": "vertex_in_degree",
    "out_degree": "vertex_out_degree",
    "pagerank": "vertex_pagerank",
    "hub": "vertex_hubs",
    "authority": "vertex_auth",
}

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000

REACHABLE = "reachable"
CONNECTED_COMPONENT = "connected_component"


def _csr(n, src, dst):
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst[order].astype(np.int64), order


class GraphIndex:
    """Interned nodes plus edge arrays and CSR adjacency in both directions.

    In undirected mode every edge also appears reversed in the adjacency.
    """

    def __init__(self, nodes: List[str], labels: List[str], src, dst, lab, directed: bool = True):
        self.nodes = nodes
        self.index = {s: i for i, s in enumerate(nodes)}
        self.labels = labels
        self.label_index = {s: i for i, s in enumerate(labels)}
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.lab = np.asarray(lab, dtype=np.int64)
        self.directed = directed
        n = len(nodes)
        asrc, adst, alab = self.arcs()
        self.out_indptr, self.out_indices, order = _csr(n, asrc, adst)
        self.out_labels = alab[order]
        self.in_indptr, self.in_indices, _ = _csr(n, adst, asrc)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.src)

    def arcs(self, mask=None):
        """Directed arcs (src, dst, label); reversed copies added when undirected."""
        s, d, l = self.src, self.dst, self.lab
        if mask is not None:
            s, d, l = s[mask], d[mask], l[mask]
        if self.directed:
            return s, d, l
        return np.concatenate([s, d]), np.concatenate([d, s]), np.concatenate([l, l])

    def label_mask(self, props: Optional[Iterable[str]]):
        if not props:
            return None
        ids = [self.label_index[p] for p in props if p in self.label_index]
        return np.isin(self.lab, np.array(ids, dtype=np.int64))


def build_graph(stream: EdgeStream, directed: bool = True) -> GraphIndex:
    h = stream.header
    i1, il, i2 = h.node1, h.label, h.node2
    need = max(i1, il, i2) + 1
    index: Dict[str, int] = {}
    nodes: List[str] = []
    label_index: Dict[str, int] = {}
    labels: List[str] = []
    src, dst, lab = [], [], []
    skipped = 0
    try:
        for batch in stream.batches():
            for r in batch:
                if len(r) < need or not r[i1] or not r[i2]:
                    skipped += 1
                    continue
                a, b, p = r[i1], r[i2], r[il]
                ia = index.get(a)
                if ia is None:
                    ia = index[a] = len(nodes)
                    nodes.append(a)
                ib = index.get(b)
                if ib is None:
                    ib = index[b] = len(nodes)
                    nodes.append(b)
                ip = label_index.get(p)
                if ip is None:
                    ip = label_index[p] = len(labels)
                    labels.append(p)
                src.append(ia)
                dst.append(ib)
                lab.append(ip)
    except MemoryError:
        raise GraphTooLarge(f"out of memory after {len(nodes)} nodes and {len(src)} edges") from None
    if skipped:
        log.warning("skipped %d rows with an empty node1 or node2", skipped)
    return GraphIndex(nodes, labels, src, dst, lab, directed)


# -- reachability and components --------------------------------------------------

def reachable_pairs(graph: GraphIndex, roots: Sequence[str], props: Optional[Iterable[str]] = None):
    """(root, node) for every node reachable from a root via edges with a label
    in ``props`` (all labels when empty). The root itself is never listed."""
    seen = set()
    ids = []
    for r in roots:
        if r in seen:
            continue
        seen.add(r)
        if r not in graph.index:
            log.warning("root %s is not in the graph", r)
            continue
        ids.append(graph.index[r])
    mask = graph.label_mask(props)
    s, d, _ = graph.arcs(mask)
    indptr, indices, _ = _csr(graph.node_count, s, d)
    nodes = graph.nodes
    out = []
    for root, reached in zip(ids, kernels.reach_many(indptr, indices, graph.node_count, ids)):
        out.extend((nodes[root], nodes[v]) for v in reached)
    return out


def reachable_nodes(graph: GraphIndex, roots, props=None, label: str = REACHABLE) -> EdgeStream:
    rows = [[a, label, b] for a, b in reachable_pairs(graph, roots, props)]
    return EdgeStream.from_rows(["node1", "label", "node2"], rows)


def component_map(graph: GraphIndex, restrict_props: Optional[Iterable[str]] = None) -> Dict[str, str]:
    """node -> smallest member symbol of its undirected component, for nodes on
    considered edges."""
    mask = graph.label_mask(restrict_props)
    s, d = (graph.src, graph.dst) if mask is None else (graph.src[mask], graph.dst[mask])
    n = graph.node_count
    roots = kernels.union_find(n, np.ascontiguousarray(s), np.ascontiguousarray(d))
    present = np.zeros(n, dtype=bool)
    present[s] = True
    present[d] = True
    nodes = graph.nodes
    best: Dict[int, str] = {}
    members = np.flatnonzero(present).tolist()
    roots = roots.tolist() if hasattr(roots, "tolist") else list(roots)
    for i in members:
        r = roots[i]
        cur = best.get(r)
        if cur is None or nodes[i] < cur:
            best[r] = nodes[i]
    return {nodes[i]: best[roots[i]] for i in members}


def connected_components(graph: GraphIndex, restrict_props=None,
                         label: str = CONNECTED_COMPONENT) -> EdgeStream:
    comp = component_map(graph, restrict_props)
    rows = [[node, label, cid] for node, cid in comp.items()]
    return EdgeStream.from_rows(["node1", "label", "node2"], rows)


# -- scores -------------------------------------------------------------------------

@dataclass
class ScoreVector:
    values: np.ndarray
    metric: str
    iterations: int = 0
    converged: bool = True

    def as_dict(self, graph: GraphIndex) -> Dict[str, float]:
        return dict(zip(graph.nodes, self.values.tolist()))


def degrees(graph: GraphIndex):
    n = graph.node_count
    s, d, _ = graph.arcs()
    indeg = np.bincount(d, minlength=n).astype(np.float64)
    outdeg = np.bincount(s, minlength=n).astype(np.float64)
    return ScoreVector(indeg, "in_degree"), ScoreVector(outdeg, "out_degree")


def pagerank(graph: GraphIndex, damping: float = 0.85, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER) -> ScoreVector:
    """Power iteration with uniform teleport and dangling mass spread evenly.

    Stops once the L1 change between sweeps drops below ``tol``.
    """
    n = graph.node_count
    if n == 0:
        raise ValueError("pagerank needs a non-empty graph")
    s, d, _ = graph.arcs()
    outdeg = np.bincount(s, minlength=n).astype(np.float64)
    dangling = outdeg == 0
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / outdeg[~dangling]
    w = inv[s]
    r = np.full(n, 1.0 / n)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        flow = np.bincount(d, weights=r[s] * w, minlength=n)
        new = (1.0 - damping) / n + damping * (flow + r[dangling].sum() / n)
        err = np.abs(new - r).sum()
        r = new
        if err < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"pagerank did not converge in {max_iter} iterations", NonConvergenceWarning)
    return ScoreVector(r, "pagerank", it, converged)


def _unit(v):
    norm = np.sqrt(np.dot(v, v))
    return v / norm if norm > 0 else v


def hits(graph: GraphIndex, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Hub and authority vectors, each L2-normalized after every half-step."""
    n = graph.node_count
    if graph.edge_count == 0:
        raise ValueError("hits needs at least one edge")
    s, d, _ = graph.arcs()
    h = np.full(n, 1.0 / np.sqrt(n))
    a = np.zeros(n)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        a_new = _unit(np.bincount(d, weights=h[s], minlength=n))
        h_new = _unit(np.bincount(s, weights=a_new[d], minlength=n))
        err = max(np.linalg.norm(h_new - h), np.linalg.norm(a_new - a))
        h, a = h_new, a_new
        if err < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"hits did not converge in {max_iter} iterations", NonConvergenceWarning)
    return ScoreVector(h, "hub", it, converged), ScoreVector(a, "authority", it, converged)


# -- summary --------------------------------------------------------------------

@dataclass
class MetricSummary:
    name: str
    minimum: float
    maximum: float
    mean: float
    top: List[tuple]


@dataclass
class GraphSummary:
    node_count: int
    edge_count: int
    top_labels: List[tuple]
    metrics: List[MetricSummary] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"nodes: {self.node_count}", f"edges: {self.edge_count}", "most common relations:"]
        lines += [f"  {lab}\t{n}" for lab, n in self.top_labels]
        for m in self.metrics:
            lines.append(f"{m.name}: min {_fmt(m.minimum)}, max {_fmt(m.maximum)}, mean {_fmt(m.mean)}")
            lines += [f"  {node}\t{_fmt(v)}" for node, v in m.top]
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(float(x))


def top_labels(graph: GraphIndex, k: int):
    counts = np.bincount(graph.lab, minlength=len(graph.labels)).tolist()
    return sorted(zip(graph.labels, counts), key=lambda kv: (-kv[1], kv[0]))[:k]


def summarize(graph: GraphIndex, metrics: Sequence[ScoreVector] = (), top_k: int = 5):
    """Summary of counts and metric aggregates, plus one edge per node and metric."""
    summary = GraphSummary(graph.node_count, graph.edge_count, top_labels(graph, top_k))
    rows = []
    nodes = graph.nodes
    for sv in metrics:
        prop = METRIC_PROPERTIES.get(sv.metric, f"vertex_{sv.metric}")
        vals = sv.values
        if len(vals):
            order = heapq.nsmallest(top_k, range(len(vals)), key=lambda i: (-vals[i], nodes[i]))
            summary.metrics.append(MetricSummary(prop, float(vals.min()), float(vals.max()),
                                                 float(vals.mean()),
                                                 [(nodes[i], float(vals[i])) for i in order]))
        rows.extend([node, prop, _fmt(v)] for node, v in zip(nodes, vals.tolist()))
    return summary, EdgeStream.from_rows(resolve_header(["node1", "label", "node2"]), rows)
