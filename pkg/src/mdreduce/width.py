"""Node-search strategies: verification, synthesis, and path decompositions.

In the node-search game an edge is cleared once both endpoints hold
searchers.  Whenever a searcher leaves a vertex that still touches a
contaminated edge, contamination spreads back through every unoccupied
vertex it can reach, un-clearing edges along the way.  A strategy that
clears the whole graph with at most w+1 searchers, never recontaminating and
never revisiting a vertex, converts directly into a path decomposition of
width w: the bags are the occupied sets after each move.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence, TextIO

from .graphs import LabeledGraph, path_point
from .md import MdInstance


@dataclass(frozen=True)
class Move:
    place: bool
    vertex: int

    def __str__(self) -> str:
        return f"{'+' if self.place else '-'} {self.vertex}"


@dataclass
class SearchTrace:
    """What a strategy achieved: peak searchers, and quality flags.

    steps holds one (occupied_count, cleared_count, recontaminated) triple
    per move.  monotone means no move ever un-cleared an edge; smooth means
    no vertex was placed twice.
    """

    max_searchers: int
    monotone: bool
    all_cleared: bool
    smooth: bool
    steps: list[tuple[int, int, bool]]

    @property
    def ok(self) -> bool:
        return self.monotone and self.all_cleared and self.smooth


def verify_strategy(g: LabeledGraph, moves: Sequence[Move]) -> SearchTrace:
    """Replay a strategy move by move and report what it achieved.

    Raises ValueError on protocol violations (placing an occupied vertex,
    removing an unoccupied one, ids out of range).  Recontamination is
    propagated incrementally: removing a vertex next to a contaminated edge
    floods every cleared edge reachable through unoccupied vertices.
    """
    occupied: set[int] = set()
    cleared: set[tuple[int, int]] = set()
    placed_ever: dict[int, int] = {}
    max_searchers = 0
    monotone = True
    smooth = True
    steps: list[tuple[int, int, bool]] = []

    def edge(u: int, w: int) -> tuple[int, int]:
        return (u, w) if u < w else (w, u)

    for idx, move in enumerate(moves):
        v = move.vertex
        if not (0 <= v < g.vertex_count):
            raise ValueError(f"move {idx}: vertex {v} does not exist")
        recontaminated = False
        if move.place:
            if v in occupied:
                raise ValueError(f"move {idx}: vertex {v} is already occupied")
            occupied.add(v)
            placed_ever[v] = placed_ever.get(v, 0) + 1
            if placed_ever[v] > 1:
                smooth = False
            max_searchers = max(max_searchers, len(occupied))
            for w in g.neighbors(v):
                if w in occupied:
                    cleared.add(edge(v, w))
        else:
            if v not in occupied:
                raise ValueError(f"move {idx}: vertex {v} is not occupied")
            occupied.remove(v)
            # contamination spreads from v only if v still touches dirt
            if any(edge(v, w) not in cleared for w in g.neighbors(v)):
                dirty = deque([v])
                seen = {v}
                while dirty:
                    x = dirty.popleft()
                    for w in g.neighbors(x):
                        e = edge(x, w)
                        if e in cleared:
                            cleared.discard(e)
                            recontaminated = True
                        if w not in occupied and w not in seen:
                            seen.add(w)
                            dirty.append(w)
                if recontaminated:
                    monotone = False
        steps.append((len(occupied), len(cleared), recontaminated))

    return SearchTrace(
        max_searchers=max_searchers,
        monotone=monotone,
        all_cleared=len(cleared) == g.edge_count,
        smooth=smooth,
        steps=steps,
    )


def strategy_to_decomposition(
    g: LabeledGraph, moves: Sequence[Move]
) -> list[frozenset[int]]:
    """Occupied-set snapshots after every move; bags of a path decomposition
    whenever the strategy is smooth, monotone, and clears everything."""
    occupied: set[int] = set()
    bags: list[frozenset[int]] = []
    for idx, move in enumerate(moves):
        if move.place:
            if move.vertex in occupied:
                raise ValueError(f"move {idx}: vertex {move.vertex} is already occupied")
            occupied.add(move.vertex)
        else:
            if move.vertex not in occupied:
                raise ValueError(f"move {idx}: vertex {move.vertex} is not occupied")
            occupied.remove(move.vertex)
        bags.append(frozenset(occupied))
    return bags


# ---------------------------------------------------------------------------
# strategy synthesis for the built instances

def synth_strategy(md: MdInstance) -> list[Move]:
    """Sweep the whole construction with at most 23 searchers.

    Permanent guards: the nine hubs.  Per class: the six anchors.  Per
    selector: the selector itself, the two p-path junctions, and the two
    detour midpoints; every incident path is then cleared by a two-searcher
    sweep whose gadget triangles cost two extra transient searchers.  Pair
    paths are swept last with their endpoints and both connectors guarded.
    """
    g = md.graph
    n, m = md.n, md.m
    half_span = 10 * (n + 1)
    moves: list[Move] = []

    host_twins: dict[int, list[tuple[int, int]]] = {}
    for gadget in md.gadgets.values():
        if not gadget.connector_is_new:
            host_twins.setdefault(gadget.connector, []).append(
                (gadget.twin1, gadget.twin2)
            )

    def place(v: int) -> None:
        moves.append(Move(True, v))

    def remove(v: int) -> None:
        moves.append(Move(False, v))

    def clear_gadgets_at(v: int) -> None:
        for t1, t2 in host_twins.get(v, ()):
            place(t1)
            place(t2)
            remove(t1)
            remove(t2)

    def sweep(pid: str, offsets: Sequence[int]) -> None:
        """Visit internal offsets in order; both segment ends must be guarded."""
        prev = None
        for off in offsets:
            v = path_point(g, pid, off)
            place(v)
            if prev is not None:
                remove(prev)
            clear_gadgets_at(v)
            prev = v
        if prev is not None:
            remove(prev)

    hub_ids = md.mrs.hub_ids()
    for hub_vid in hub_ids:
        place(hub_vid)

    for i in range(1, n + 1):
        for h in (1, 2):
            place(md.anchor_id("pi", i, h))
            place(md.anchor_id("p", i, h))
            place(md.anchor_id("q", i, h))

        for j in range(1, m + 1):
            s_id = md.mrs.selector_id(i, j)
            place(s_id)
            w_junction = {}
            for h in (1, 2):
                w_junction[h] = path_point(g, f"P(s[{i},{j}],p[{i},{h}])", 1)
                place(w_junction[h])
            for h in (1, 2):
                place(md.mids[(i, j, h)])
                clear_gadgets_at(md.mids[(i, j, h)])

            for h in (1, 2):
                pid = f"P[{h}]({i},{j},p[{i},{3 - h}])"
                length = g.paths[pid].length
                sweep(pid, range(1, half_span))
                sweep(pid, range(half_span + 1, length))
            for h in (1, 2):
                pid = f"L({i},{j},{h})"
                sweep(pid, range(1, g.paths[pid].length))
            for h in (1, 2):
                pid = f"P(s[{i},{j}],p[{i},{h}])"
                sweep(pid, range(2, g.paths[pid].length))
            for h in (1, 2):
                remove(w_junction[h])

            for letter in ("a", "b", "c"):
                for r in (1, 2, 3):
                    hub_pid = f"P(s[{i},{j}],{letter}[{r}])"
                    z = path_point(g, hub_pid, 1)
                    place(z)
                    for h in (1, 2):
                        pid = f"P[{h}]({i},{j},{letter}[{r}])"
                        sweep(pid, range(1, g.paths[pid].length))
                    sweep(hub_pid, range(2, g.paths[hub_pid].length))
                    remove(z)

            for h in (1, 2):
                remove(md.mids[(i, j, h)])
            remove(s_id)

        for h in (1, 2):
            for letter in ("a", "c"):
                for r in (1, 2, 3):
                    pid = f"P(pi[{i},{h}],{letter}[{r}])"
                    sweep(pid, range(1, g.paths[pid].length))
        for h in (1, 2):
            remove(md.anchor_id("q", i, h))
            remove(md.anchor_id("p", i, h))
            remove(md.anchor_id("pi", i, h))

    for r in (1, 2, 3):
        for x in range(1, n + 1):
            u_id, v_id = md.mrs.pairs[(r, x)]
            f1 = md.gadgets[f"F1(u[{r},{x}])"]
            f2 = md.gadgets[f"F2(u[{r},{x}])"]
            place(u_id)
            place(v_id)
            for gadget in (f1, f2):
                place(gadget.connector)
                place(gadget.twin1)
                place(gadget.twin2)
                remove(gadget.twin1)
                remove(gadget.twin2)
            for letter in ("a", "b", "c"):
                for endpoint in ("u", "v"):
                    pid = f"P({letter}[{r}],{endpoint}[{r},{x}])"
                    sweep(pid, range(1, g.paths[pid].length))
            remove(f2.connector)
            remove(f1.connector)
            remove(v_id)
            remove(u_id)

    for hub_vid in hub_ids:
        remove(hub_vid)
    return moves


# ---------------------------------------------------------------------------
# strategy file format

def write_strategy(moves: Sequence[Move], fh: TextIO) -> None:
    for move in moves:
        fh.write(f"{move}\n")


def parse_strategy(fh: TextIO) -> list[Move]:
    """One `+ <id>` or `- <id>` per line; comments and blanks allowed."""
    moves: list[Move] = []
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2 or fields[0] not in ("+", "-"):
            raise ValueError(f"line {lineno}: expected '+ <id>' or '- <id>', got {line!r}")
        try:
            vertex = int(fields[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer vertex {fields[1]!r}") from None
        moves.append(Move(fields[0] == "+", vertex))
    return moves
