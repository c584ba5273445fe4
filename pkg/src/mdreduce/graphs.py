"""Labeled undirected graphs, BFS distances, and resolving-set machinery.

Every graph built by this package is a simple undirected graph whose vertices
carry a structured semantic label (a role plus indices).  Vertex ids are dense
integers assigned in construction order; the labels carry all meaning.  Long
subdivided paths are registered by id so builders can address "the vertex at
offset t along path P" without keeping side tables.
"""
from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

INFINITE = math.inf
"""Distance sentinel for unreachable vertices in DistanceVector."""

UNREACHED = -1
"""Sentinel used inside integer numpy distance matrices (internal)."""

_WORKERS_ENV = "MDREDUCE_WORKERS"


class ConstructionError(Exception):
    """A builder produced something the construction recipe forbids."""


class CapacityError(Exception):
    """Input exceeds a guard meant to keep exhaustive computation feasible."""


# ---------------------------------------------------------------------------
# labels

_INT_KINDS = {
    # kind -> number of integer indices
    "s": 2,   # selector s[i,j]
    "a": 1,   # hub a[r]
    "b": 1,
    "c": 1,
    "u": 2,   # pair vertex u[r,i]
    "v": 2,
    "p": 2,   # forced-set anchor p[i,h]
    "q": 2,
    "pi": 2,
}
_ID_KINDS = {"twin1", "twin2", "conn"}  # payload is a gadget id string


@dataclass(frozen=True)
class Label:
    """Semantic vertex label: a role kind plus its indices.

    args holds ints for the indexed kinds, (path_id, offset) for "pv", and a
    single gadget-id string for twin1/twin2/conn.
    """

    kind: str
    args: tuple

    def __str__(self) -> str:
        return format_label(self)


def selector(i: int, j: int) -> Label:
    return Label("s", (i, j))


def hub(letter: str, r: int) -> Label:
    if letter not in ("a", "b", "c"):
        raise ValueError(f"hub letter must be a/b/c, got {letter!r}")
    return Label(letter, (r,))


def pair_vertex(letter: str, r: int, i: int) -> Label:
    if letter not in ("u", "v"):
        raise ValueError(f"pair vertex letter must be u/v, got {letter!r}")
    return Label(letter, (r, i))


def anchor(kind: str, i: int, h: int) -> Label:
    if kind not in ("p", "q", "pi"):
        raise ValueError(f"anchor kind must be p/q/pi, got {kind!r}")
    return Label(kind, (i, h))


def path_vertex(path_id: str, offset: int) -> Label:
    return Label("pv", (path_id, offset))


def twin1(gadget_id: str) -> Label:
    return Label("twin1", (gadget_id,))


def twin2(gadget_id: str) -> Label:
    return Label("twin2", (gadget_id,))


def connector(gadget_id: str) -> Label:
    return Label("conn", (gadget_id,))


def format_label(label: Label) -> str:
    if label.kind in _INT_KINDS:
        return f"{label.kind}[{','.join(str(x) for x in label.args)}]"
    if label.kind == "pv":
        path_id, offset = label.args
        return f"pv[{path_id},{offset}]"
    if label.kind in _ID_KINDS:
        return f"{label.kind}[{label.args[0]}]"
    raise ValueError(f"unknown label kind {label.kind!r}")


def parse_label(text: str) -> Label:
    """Inverse of format_label. Raises ValueError on malformed text."""
    bracket = text.find("[")
    if bracket <= 0 or not text.endswith("]"):
        raise ValueError(f"malformed label {text!r}")
    kind = text[:bracket]
    payload = text[bracket + 1 : -1]
    if kind in _INT_KINDS:
        parts = payload.split(",")
        if len(parts) != _INT_KINDS[kind]:
            raise ValueError(f"label {text!r}: expected {_INT_KINDS[kind]} indices")
        try:
            return Label(kind, tuple(int(x) for x in parts))
        except ValueError:
            raise ValueError(f"label {text!r}: non-integer index") from None
    if kind == "pv":
        # path ids contain commas; the offset is everything after the last one
        path_id, sep, offset = payload.rpartition(",")
        if not sep or not path_id:
            raise ValueError(f"label {text!r}: pv needs pathId,offset")
        try:
            return Label("pv", (path_id, int(offset)))
        except ValueError:
            raise ValueError(f"label {text!r}: non-integer pv offset") from None
    if kind in _ID_KINDS:
        if not payload:
            raise ValueError(f"label {text!r}: empty gadget id")
        return Label(kind, (payload,))
    raise ValueError(f"unknown label kind in {text!r}")


# ---------------------------------------------------------------------------
# graph

@dataclass(frozen=True)
class PathInfo:
    """Registry entry for a subdivided path: endpoints and length in edges."""

    u: int
    w: int
    length: int


class LabeledGraph:
    """Simple undirected graph with a label bijection and a path registry.

    Mutating methods are meant for builders only; verification code treats a
    built graph as immutable (all read paths are side-effect free except for
    lazily cached adjacency structures).
    """

    def __init__(self) -> None:
        self._adj: list[list[int]] = []
        self._labels: list[Label] = []
        self._by_label: dict[Label, int] = {}
        self._edge_set: set[tuple[int, int]] = set()
        self.paths: dict[str, PathInfo] = {}
        self._csr: Optional[csr_matrix] = None
        self._sorted = True

    # -- construction ------------------------------------------------------

    def add_vertex(self, label: Label) -> int:
        if label in self._by_label:
            raise ConstructionError(f"duplicate label {label}")
        vid = len(self._adj)
        self._adj.append([])
        self._labels.append(label)
        self._by_label[label] = vid
        self._csr = None
        return vid

    def add_edge(self, u: int, w: int) -> None:
        if u == w:
            raise ConstructionError(f"loop at vertex {u} ({self._labels[u]})")
        key = (u, w) if u < w else (w, u)
        if key in self._edge_set:
            raise ConstructionError(
                f"duplicate edge {self._labels[u]} -- {self._labels[w]}"
            )
        self._edge_set.add(key)
        self._adj[u].append(w)
        self._adj[w].append(u)
        self._csr = None
        self._sorted = False

    # -- reads -------------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self._adj)

    @property
    def edge_count(self) -> int:
        return len(self._edge_set)

    def vertices(self) -> range:
        return range(len(self._adj))

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as (u, w) with u < w, sorted."""
        return iter(sorted(self._edge_set))

    def neighbors(self, v: int) -> list[int]:
        if not self._sorted:
            for lst in self._adj:
                lst.sort()
            self._sorted = True
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, w: int) -> bool:
        key = (u, w) if u < w else (w, u)
        return key in self._edge_set

    def label(self, v: int) -> Label:
        return self._labels[v]

    def vertex(self, label: Label) -> int:
        """Vertex id for a label. KeyError if absent."""
        return self._by_label[label]

    def has_label(self, label: Label) -> bool:
        return label in self._by_label

    def csr(self) -> csr_matrix:
        """Cached CSR adjacency (both directions stored, data all ones)."""
        if self._csr is None:
            n = len(self._adj)
            rows = np.empty(2 * len(self._edge_set), dtype=np.int32)
            cols = np.empty(2 * len(self._edge_set), dtype=np.int32)
            k = 0
            for u, w in self._edge_set:
                rows[k], cols[k] = u, w
                rows[k + 1], cols[k + 1] = w, u
                k += 2
            data = np.ones(k, dtype=np.int8)
            self._csr = csr_matrix((data, (rows, cols)), shape=(n, n))
        return self._csr


def add_path(g: LabeledGraph, u: int, w: int, length: int, path_id: str) -> str:
    """Link u and w by a fresh path of `length` edges.

    Creates length-1 internal vertices labeled pv[path_id, offset] with
    offsets 1..length-1 counted from u.  length=1 degenerates to a single
    edge.  Duplicate path ids and duplicate edges are construction errors
    (they signal a builder bug, not bad user input).
    """
    if length < 1:
        raise ConstructionError(f"path {path_id}: length must be >= 1, got {length}")
    if path_id in g.paths:
        raise ConstructionError(f"duplicate path id {path_id}")
    for v in (u, w):
        if not (0 <= v < g.vertex_count):
            raise ConstructionError(f"path {path_id}: endpoint {v} does not exist")
    prev = u
    for offset in range(1, length):
        nv = g.add_vertex(path_vertex(path_id, offset))
        g.add_edge(prev, nv)
        prev = nv
    g.add_edge(prev, w)
    g.paths[path_id] = PathInfo(u, w, length)
    return path_id


def path_point(g: LabeledGraph, path_id: str, offset: int) -> int:
    """Vertex at `offset` edges from the first endpoint of a registered path."""
    info = g.paths[path_id]
    if offset == 0:
        return info.u
    if offset == info.length:
        return info.w
    if not 0 < offset < info.length:
        raise ValueError(f"offset {offset} outside path {path_id} (length {info.length})")
    return g.vertex(path_vertex(path_id, offset))


# ---------------------------------------------------------------------------
# distances

@dataclass
class DistanceVector:
    """Hop counts from a source to every vertex; INFINITE where unreachable."""

    source: int
    dist: list

    def __getitem__(self, v: int) -> int | float:
        return self.dist[v]


def bfs_distances(g: LabeledGraph, src: int) -> DistanceVector:
    """Exact unweighted shortest-path distances from src (plain deque BFS).

    This is the reference implementation; batched verification uses
    distance_matrix, and the two are cross-checked by the test suite.
    """
    if not (0 <= src < g.vertex_count):
        raise ValueError(f"source {src} does not exist")
    dist: list = [INFINITE] * g.vertex_count
    dist[src] = 0
    queue = deque([src])
    adj = g._adj
    while queue:
        x = queue.popleft()
        dx = dist[x]
        for y in adj[x]:
            if dist[y] is INFINITE or dist[y] == INFINITE:
                dist[y] = dx + 1
                queue.append(y)
    return DistanceVector(src, dist)


def _worker_count() -> int:
    raw = os.environ.get(_WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def distance_matrix(g: LabeledGraph, sources: Sequence[int]) -> np.ndarray:
    """BFS distances from each source: int32 array (len(sources), |V|).

    Unreachable entries hold UNREACHED.  One BFS per source, run in C via
    scipy; the worker env var only affects chunking of very large batches.
    """
    if len(sources) == 0:
        return np.empty((0, g.vertex_count), dtype=np.int32)
    src = np.asarray(sources, dtype=np.int32)
    if src.min() < 0 or src.max() >= g.vertex_count:
        raise ValueError("source out of range")
    csr = g.csr()
    workers = _worker_count()
    # chunk to bound the float64 intermediate scipy returns
    chunk = max(256, math.ceil(len(src) / max(workers, 1)))
    out = np.empty((len(src), g.vertex_count), dtype=np.int32)

    def run(lo: int, hi: int) -> None:
        d = _csgraph_dijkstra(csr, directed=True, unweighted=True, indices=src[lo:hi])
        block = out[lo:hi]
        np.copyto(block, np.where(np.isinf(d), UNREACHED, d).astype(np.int32))

    spans = [(lo, min(lo + chunk, len(src))) for lo in range(0, len(src), chunk)]
    if workers > 1 and len(spans) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda s: run(*s), spans))
    else:
        for lo, hi in spans:
            run(lo, hi)
    return out


# ---------------------------------------------------------------------------
# resolving sets

def resolves(g: LabeledGraph, w: int, x: int, y: int) -> bool:
    """True iff dist(w,x) != dist(w,y)."""
    if x == y:
        raise ValueError("resolves() needs two distinct targets")
    d = bfs_distances(g, w)
    return d[x] != d[y]


def resolver_set(g: LabeledGraph, x: int, y: int) -> frozenset[int]:
    """All vertices w with dist(w,x) != dist(w,y), from two BFS runs."""
    if x == y:
        raise ValueError("resolver_set() needs two distinct vertices")
    d = distance_matrix(g, [x, y])
    return frozenset(np.flatnonzero(d[0] != d[1]).tolist())


@dataclass(frozen=True)
class ResolveCheck:
    """Outcome of is_resolving_set: ok, or one unresolved vertex pair."""

    ok: bool
    witness: Optional[tuple[int, int]] = None

    def __bool__(self) -> bool:
        return self.ok


def is_resolving_set(g: LabeledGraph, S: Iterable[int]) -> ResolveCheck:
    """Check whether all distance vectors to S are pairwise distinct.

    |S| BFS runs, then duplicate detection by hashing the per-vertex distance
    rows (subquadratic in |V|, as required for graphs of ~1e5 vertices).  On
    failure the witness is the unresolved pair with the smallest vertex ids.
    """
    srcs = sorted(set(S))
    n = g.vertex_count
    if not srcs:
        if n >= 2:
            return ResolveCheck(False, (0, 1))
        return ResolveCheck(True)
    dmat = distance_matrix(g, srcs)
    vectors = np.ascontiguousarray(dmat.T)
    void = vectors.view([("", vectors.dtype)] * vectors.shape[1]).ravel()
    if len(np.unique(void)) == n:
        return ResolveCheck(True)
    seen: dict[bytes, int] = {}
    for v in range(n):
        key = vectors[v].tobytes()
        if key in seen:
            return ResolveCheck(False, (seen[key], v))
        seen[key] = v
    raise AssertionError("unique count mismatched hash scan")  # pragma: no cover


def is_resolving_set_naive(g: LabeledGraph, S: Iterable[int]) -> ResolveCheck:
    """Definition-chasing reference: every vertex pair must have a resolver in S.

    Quadratic in |V|; only for cross-checks on small graphs.
    """
    srcs = sorted(set(S))
    rows = [bfs_distances(g, s).dist for s in srcs]
    n = g.vertex_count
    for x in range(n):
        for y in range(x + 1, n):
            if not any(row[x] != row[y] for row in rows):
                return ResolveCheck(False, (x, y))
    return ResolveCheck(True)


def metric_dimension_tiny(g: LabeledGraph, max_k: int) -> Optional[tuple[int, ...]]:
    """Smallest resolving set of size <= max_k by subset enumeration.

    Guarded to |V| <= 16; increasing size, lexicographic tie-break.  Returns
    None when no subset within the budget resolves.  The empty set counts as
    resolving only for graphs with fewer than two vertices.
    """
    n = g.vertex_count
    if n > 16:
        raise CapacityError(f"metric_dimension_tiny is capped at 16 vertices, got {n}")
    full = distance_matrix(g, list(range(n))) if n else np.empty((0, 0), dtype=np.int32)
    for k in range(0, max_k + 1):
        for S in combinations(range(n), k):
            if len({tuple(full[list(S), v]) for v in range(n)}) == n:
                return S
    return None


# ---------------------------------------------------------------------------
# reports and path decompositions

@dataclass
class CheckReport:
    """Shared shape for exhaustive verification passes.

    checks counts individual assertions made; violations holds one
    human-readable line per failed assertion (expected: none).
    """

    name: str
    checks: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def require(self, condition: bool, message: str) -> None:
        self.checks += 1
        if not condition:
            self.violations.append(message)

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.violations)} violation(s)"
        return f"{self.name}: {self.checks} checks, {status}"


@dataclass(frozen=True)
class DecompositionResult:
    """Width of a valid path decomposition, or a named violation."""

    width: Optional[int]
    violation: Optional[str] = None
    witness: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return self.violation is None


def validate_path_decomposition(
    g: LabeledGraph, bags: Sequence[Iterable[int]]
) -> DecompositionResult:
    """Validate bags as a path decomposition of g and return its width.

    Checks, in order: every vertex occurs; every vertex's occurrences are a
    contiguous run of bags; every edge is contained in some bag.
    """
    if not bags:
        raise ValueError("validate_path_decomposition needs at least one bag")
    bag_sets = [frozenset(b) for b in bags]
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    count: dict[int, int] = {}
    for idx, bag in enumerate(bag_sets):
        for v in bag:
            if not (0 <= v < g.vertex_count):
                return DecompositionResult(None, "unknown-vertex", (idx, v))
            if v not in first:
                first[v] = idx
            last[v] = idx
            count[v] = count.get(v, 0) + 1
    for v in g.vertices():
        if v not in first:
            return DecompositionResult(None, "vertex-missing", (v,))
    for v, c in count.items():
        if last[v] - first[v] + 1 != c:
            return DecompositionResult(None, "not-contiguous", (v,))
    for u, w in g.edges():
        # with contiguity verified, interval overlap == some bag has both
        if max(first[u], first[w]) > min(last[u], last[w]):
            return DecompositionResult(None, "edge-uncovered", (u, w))
    return DecompositionResult(max(len(b) for b in bag_sets) - 1)
