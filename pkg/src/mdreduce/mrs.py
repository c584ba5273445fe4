"""First reduction stage: 3-dimensional matching to multicolored resolving set.

The built graph has one selector vertex per (color class, triple), nine hub
vertices, and a (u, v) target pair per (coordinate, value).  Path lengths are
tuned so a selector resolves exactly the pairs its triple covers: both routes
to a pair run through hubs, and the only asymmetry between u and v is one
unit on the middle-hub route, visible iff the direct routes tie at length M.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

from .graphs import (
    CapacityError,
    CheckReport,
    ConstructionError,
    LabeledGraph,
    add_path,
    distance_matrix,
    format_label,
    hub,
    pair_vertex,
    selector,
)
from .tdm import ThreeDMInstance

PairKey = tuple[int, int]  # (coordinate r, value x)

SOLVE_MRS_CAP = 10**6
"""solve_mrs refuses instances with more than this many selections (m**n)."""


@dataclass
class MrsInstance:
    """A built first-stage instance tied to its graph.

    color_classes maps class index i to the m selector ids in triple order;
    pairs maps (r, x) to the (u, v) vertex ids; hubs maps formatted hub
    labels to ids.
    """

    graph: LabeledGraph
    n: int
    M: int
    color_classes: dict[int, tuple[int, ...]]
    pairs: dict[PairKey, tuple[int, int]]
    hubs: dict[str, int]

    @property
    def m(self) -> int:
        return len(next(iter(self.color_classes.values())))

    def pair_keys(self) -> list[PairKey]:
        return sorted(self.pairs)

    def hub_ids(self) -> list[int]:
        return [self.hubs[name] for name in sorted(self.hubs)]

    def selector_id(self, i: int, j: int) -> int:
        return self.color_classes[i][j - 1]


def build_mrs(inst: ThreeDMInstance, check: bool = True) -> MrsInstance:
    """Construct the resolving-set instance for a 3DM instance.

    check=True re-derives every tuned distance by BFS and raises
    ConstructionError on any mismatch, so a successfully built instance has
    machine-checked distance structure.
    """
    n, m = inst.n, inst.m
    M = 40 * (n + 1)
    half = M // 2
    g = LabeledGraph()

    classes: dict[int, tuple[int, ...]] = {}
    for i in range(1, n + 1):
        classes[i] = tuple(g.add_vertex(selector(i, j)) for j in range(1, m + 1))

    hubs: dict[str, int] = {}
    for letter in ("a", "b", "c"):
        for r in (1, 2, 3):
            label = hub(letter, r)
            hubs[format_label(label)] = g.add_vertex(label)

    pairs: dict[PairKey, tuple[int, int]] = {}
    for r in (1, 2, 3):
        for x in range(1, n + 1):
            u_id = g.add_vertex(pair_vertex("u", r, x))
            v_id = g.add_vertex(pair_vertex("v", r, x))
            pairs[(r, x)] = (u_id, v_id)

    # selector-to-hub paths; lengths encode the triple's value per coordinate
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            s_id = classes[i][j - 1]
            for r in (1, 2, 3):
                t = inst.triples[j - 1][r - 1]
                add_path(g, s_id, hubs[f"a[{r}]"], half + 10 * t, f"P(s[{i},{j}],a[{r}])")
                add_path(g, s_id, hubs[f"b[{r}]"], half + 5 * t + 1, f"P(s[{i},{j}],b[{r}])")
                add_path(g, s_id, hubs[f"c[{r}]"], half - 10 * t, f"P(s[{i},{j}],c[{r}])")

    # hub-to-pair paths; the v copy is one shorter on the middle hub only
    for r in (1, 2, 3):
        for x in range(1, n + 1):
            u_id, v_id = pairs[(r, x)]
            add_path(g, hubs[f"a[{r}]"], u_id, half - 10 * x, f"P(a[{r}],u[{r},{x}])")
            add_path(g, hubs[f"b[{r}]"], u_id, half - 5 * x - 1, f"P(b[{r}],u[{r},{x}])")
            add_path(g, hubs[f"c[{r}]"], u_id, half + 10 * x, f"P(c[{r}],u[{r},{x}])")
            add_path(g, hubs[f"a[{r}]"], v_id, half - 10 * x, f"P(a[{r}],v[{r},{x}])")
            add_path(g, hubs[f"b[{r}]"], v_id, half - 5 * x - 2, f"P(b[{r}],v[{r},{x}])")
            add_path(g, hubs[f"c[{r}]"], v_id, half + 10 * x, f"P(c[{r}],v[{r},{x}])")

    mrs = MrsInstance(g, n, M, classes, pairs, hubs)
    if check:
        report = verify_mrs_distances(mrs, inst)
        if not report.ok:
            head = "; ".join(report.violations[:5])
            raise ConstructionError(
                f"distance self-check failed ({len(report.violations)} violations): {head}"
            )
    return mrs


def verify_mrs_distances(mrs: MrsInstance, src: ThreeDMInstance) -> CheckReport:
    """Re-derive all tuned distances by BFS and compare against the targets.

    Covers selector-to-hub, selector-to-pair (both membership cases), and
    hub-to-pair distances for every selector, hub, and pair.
    """
    report = CheckReport("mrs-distances")
    g, M = mrs.graph, mrs.M
    half = M // 2
    sel_ids = [mrs.selector_id(i, j) for i in range(1, mrs.n + 1) for j in range(1, mrs.m + 1)]
    hub_ids = mrs.hub_ids()
    sources = sel_ids + hub_ids
    dmat = distance_matrix(g, sources)
    row = {vid: k for k, vid in enumerate(sources)}

    for i in range(1, mrs.n + 1):
        for j in range(1, mrs.m + 1):
            srow = dmat[row[mrs.selector_id(i, j)]]
            triple = src.triples[j - 1]
            for r in (1, 2, 3):
                t = triple[r - 1]
                for letter, want in (
                    ("a", half + 10 * t),
                    ("b", half + 5 * t + 1),
                    ("c", half - 10 * t),
                ):
                    got = int(srow[mrs.hubs[f"{letter}[{r}]"]])
                    report.require(
                        got == want,
                        f"dist(s[{i},{j}],{letter}[{r}]) = {got}, want {want}",
                    )
            for (r, x), (u_id, v_id) in sorted(mrs.pairs.items()):
                t = triple[r - 1]
                if t == x:
                    want_u, want_v = M, M - 1
                else:
                    want_u = want_v = M - 10 * abs(t - x)
                got_u, got_v = int(srow[u_id]), int(srow[v_id])
                report.require(
                    got_u == want_u,
                    f"dist(s[{i},{j}],u[{r},{x}]) = {got_u}, want {want_u}",
                )
                report.require(
                    got_v == want_v,
                    f"dist(s[{i},{j}],v[{r},{x}]) = {got_v}, want {want_v}",
                )

    for (r, x), (u_id, v_id) in sorted(mrs.pairs.items()):
        for letter, want_u, want_v in (
            ("a", half - 10 * x, half - 10 * x),
            ("b", half - 5 * x - 1, half - 5 * x - 2),
            ("c", half + 10 * x, half + 10 * x),
        ):
            hrow = dmat[row[mrs.hubs[f"{letter}[{r}]"]]]
            got_u, got_v = int(hrow[u_id]), int(hrow[v_id])
            report.require(
                got_u == want_u,
                f"dist({letter}[{r}],u[{r},{x}]) = {got_u}, want {want_u}",
            )
            report.require(
                got_v == want_v,
                f"dist({letter}[{r}],v[{r},{x}]) = {got_v}, want {want_v}",
            )
    return report


def verify_lemma_resolve(mrs: MrsInstance, src: ThreeDMInstance) -> CheckReport:
    """Exhaustive biconditional: a selector resolves a pair iff its triple covers it.

    Runs BFS from the pair endpoints (the opposite direction from the build
    self-check) and only compares distances for equality, so it does not
    assume the tuned values.
    """
    report = CheckReport("selector-pair-resolution")
    keys = mrs.pair_keys()
    endpoint_ids = [vid for key in keys for vid in mrs.pairs[key]]
    dmat = distance_matrix(mrs.graph, endpoint_ids)
    for k, (r, x) in enumerate(keys):
        urow, vrow = dmat[2 * k], dmat[2 * k + 1]
        for i in range(1, mrs.n + 1):
            for j in range(1, mrs.m + 1):
                s_id = mrs.selector_id(i, j)
                resolved = int(urow[s_id]) != int(vrow[s_id])
                covered = src.triples[j - 1][r - 1] == x
                report.require(
                    resolved == covered,
                    f"s[{i},{j}] vs pair ({r},{x}): resolves={resolved} covered={covered}",
                )
    return report


@dataclass(frozen=True)
class MrsSolutionCheck:
    ok: bool
    unresolved: Optional[PairKey] = None

    def __bool__(self) -> bool:
        return self.ok


def check_mrs_solution(mrs: MrsInstance, js: Sequence[int]) -> MrsSolutionCheck:
    """Does picking selector js[i-1] from each class resolve every pair?

    Verified with fresh BFS from the chosen vertices.  On failure reports the
    smallest unresolved (r, x).
    """
    if len(js) != mrs.n:
        raise ValueError(f"need one choice per class: got {len(js)}, want {mrs.n}")
    if any(not (1 <= j <= mrs.m) for j in js):
        raise ValueError(f"choices must lie in 1..{mrs.m}")
    chosen = [mrs.selector_id(i, js[i - 1]) for i in range(1, mrs.n + 1)]
    dmat = distance_matrix(mrs.graph, chosen)
    for key in mrs.pair_keys():
        u_id, v_id = mrs.pairs[key]
        if not any(dmat[k, u_id] != dmat[k, v_id] for k in range(len(chosen))):
            return MrsSolutionCheck(False, key)
    return MrsSolutionCheck(True)


def solve_mrs(mrs: MrsInstance) -> Optional[tuple[int, ...]]:
    """Exact search for a multicolored resolving selection.

    Resolution masks are computed from BFS distances, not from the intended
    algebra, so this solver stays honest about what the graph actually does.
    Returns the lexicographically first (j_1, ..., j_n) or None; refuses
    instances with more than SOLVE_MRS_CAP candidate selections.
    """
    if mrs.m**mrs.n > SOLVE_MRS_CAP:
        raise CapacityError(
            f"solve_mrs is capped at {SOLVE_MRS_CAP} selections, got {mrs.m}**{mrs.n}"
        )
    keys = mrs.pair_keys()
    endpoint_ids = [vid for key in keys for vid in mrs.pairs[key]]
    dmat = distance_matrix(mrs.graph, endpoint_ids)
    full = (1 << len(keys)) - 1

    masks: dict[int, list[int]] = {}
    for i in range(1, mrs.n + 1):
        per_class = []
        for j in range(1, mrs.m + 1):
            s_id = mrs.selector_id(i, j)
            mask = 0
            for k in range(len(keys)):
                if dmat[2 * k, s_id] != dmat[2 * k + 1, s_id]:
                    mask |= 1 << k
            per_class.append(mask)
        masks[i] = per_class

    # suffix OR of everything classes i..n could still contribute
    suffix = [0] * (mrs.n + 2)
    for i in range(mrs.n, 0, -1):
        acc = 0
        for mask in masks[i]:
            acc |= mask
        suffix[i] = suffix[i + 1] | acc

    choice = [0] * mrs.n

    def extend(i: int, got: int) -> bool:
        if i > mrs.n:
            return got == full
        if got | suffix[i] != full:
            return False
        for j in range(1, mrs.m + 1):
            choice[i - 1] = j
            if extend(i + 1, got | masks[i][j - 1]):
                return True
        return False

    if not extend(1, 0):
        return None
    return tuple(choice)


@dataclass(frozen=True)
class FvsReport:
    """Is the graph minus the removed vertices acyclic, and in how many pieces?"""

    acyclic: bool
    cycle: Optional[tuple[int, ...]] = None
    components: int = 0

    def __bool__(self) -> bool:
        return self.acyclic


def verify_fvs(g: LabeledGraph, removed: Iterable[int]) -> FvsReport:
    """Check that deleting `removed` leaves a forest (union-find over edges).

    On failure the witness is a cycle in the remaining graph, listed as a
    vertex sequence whose consecutive entries (wrapping) are edges.
    """
    gone = set(removed)
    parent = list(range(g.vertex_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    forest: dict[int, list[int]] = {}
    for u, w in g.edges():
        if u in gone or w in gone:
            continue
        ru, rw = find(u), find(w)
        if ru == rw:
            cycle = _forest_path(forest, u, w)
            return FvsReport(False, tuple(cycle))
        parent[ru] = rw
        forest.setdefault(u, []).append(w)
        forest.setdefault(w, []).append(u)

    roots = {find(v) for v in g.vertices() if v not in gone}
    return FvsReport(True, None, len(roots))


def _forest_path(forest: dict[int, list[int]], start: int, goal: int) -> list[int]:
    """Unique path between two vertices of the same tree (BFS with parents)."""
    from collections import deque

    prev = {start: start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if x == goal:
            break
        for y in forest.get(x, ()):
            if y not in prev:
                prev[y] = x
                queue.append(y)
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    path.reverse()
    return path


# ---------------------------------------------------------------------------
# sidecar serialization

def write_mrs_sidecar(mrs: MrsInstance, fh: TextIO) -> None:
    fh.write(f"param n {mrs.n}\n")
    fh.write(f"param M {mrs.M}\n")
    for name in sorted(mrs.hubs):
        fh.write(f"hub {name} {mrs.hubs[name]}\n")
    for i in range(1, mrs.n + 1):
        ids = " ".join(str(v) for v in mrs.color_classes[i])
        fh.write(f"xset {i} {ids}\n")
    for (r, x) in mrs.pair_keys():
        u_id, v_id = mrs.pairs[(r, x)]
        fh.write(f"pair {r} {x} {u_id} {v_id}\n")


_HUB_NAME = re.compile(r"^[abc]\[[123]\]$")


def read_mrs_sidecar(fh: TextIO, g: LabeledGraph) -> MrsInstance:
    """Rebuild an MrsInstance from its sidecar, cross-checking labels in g."""
    n: Optional[int] = None
    M: Optional[int] = None
    hubs: dict[str, int] = {}
    classes: dict[int, tuple[int, ...]] = {}
    pairs: dict[PairKey, tuple[int, int]] = {}

    def vid(token: str, lineno: int) -> int:
        try:
            v = int(token)
        except ValueError:
            raise ValueError(f"sidecar line {lineno}: non-integer id {token!r}") from None
        if not (0 <= v < g.vertex_count):
            raise ValueError(f"sidecar line {lineno}: id {v} out of range")
        return v

    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kind = fields[0]
        if kind == "param":
            if len(fields) != 3 or fields[1] not in ("n", "M"):
                raise ValueError(f"sidecar line {lineno}: expected 'param n|M <int>'")
            value = int(fields[2])
            if fields[1] == "n":
                n = value
            else:
                M = value
        elif kind == "hub":
            if len(fields) != 3 or not _HUB_NAME.match(fields[1]):
                raise ValueError(f"sidecar line {lineno}: expected 'hub <a|b|c>[r] <id>'")
            name = fields[1]
            if name in hubs:
                raise ValueError(f"sidecar line {lineno}: duplicate hub {name}")
            v = vid(fields[2], lineno)
            if format_label(g.label(v)) != name:
                raise ValueError(
                    f"sidecar line {lineno}: vertex {v} is {g.label(v)}, not {name}"
                )
            hubs[name] = v
        elif kind == "xset":
            if len(fields) < 3:
                raise ValueError(f"sidecar line {lineno}: xset needs a class and ids")
            i = int(fields[1])
            if i in classes:
                raise ValueError(f"sidecar line {lineno}: duplicate class {i}")
            ids = tuple(vid(tok, lineno) for tok in fields[2:])
            for j, v in enumerate(ids, start=1):
                if g.label(v) != selector(i, j):
                    raise ValueError(
                        f"sidecar line {lineno}: vertex {v} is {g.label(v)}, "
                        f"not s[{i},{j}]"
                    )
            classes[i] = ids
        elif kind == "pair":
            if len(fields) != 5:
                raise ValueError(f"sidecar line {lineno}: expected 'pair <r> <i> <u> <v>'")
            r, x = int(fields[1]), int(fields[2])
            if (r, x) in pairs:
                raise ValueError(f"sidecar line {lineno}: duplicate pair ({r},{x})")
            u_id, v_id = vid(fields[3], lineno), vid(fields[4], lineno)
            if g.label(u_id) != pair_vertex("u", r, x) or g.label(v_id) != pair_vertex("v", r, x):
                raise ValueError(f"sidecar line {lineno}: pair ids mislabeled")
            pairs[(r, x)] = (u_id, v_id)
        else:
            raise ValueError(f"sidecar line {lineno}: unknown directive {kind!r}")

    if n is None or M is None:
        raise ValueError("sidecar: missing param n or param M")
    if sorted(classes) != list(range(1, n + 1)):
        raise ValueError(f"sidecar: classes {sorted(classes)} do not cover 1..{n}")
    sizes = {len(ids) for ids in classes.values()}
    if len(sizes) != 1:
        raise ValueError("sidecar: color classes differ in size")
    want_pairs = {(r, x) for r in (1, 2, 3) for x in range(1, n + 1)}
    if set(pairs) != want_pairs:
        raise ValueError("sidecar: pair lines do not cover {1,2,3} x [n]")
    if len(hubs) != 9:
        raise ValueError(f"sidecar: expected 9 hubs, got {len(hubs)}")
    return MrsInstance(g, n, M, classes, pairs, hubs)
