"""3-dimensional matching instances: parse, generate, solve.

An instance over ground value n holds m ordered triples from [n]^3, read as
subsets {(1,x),(2,y),(3,z)} of {1,2,3} x [n].  A solution picks n triples
covering every (coordinate, value) pair exactly once.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, TextIO

Triple = tuple[int, int, int]


@dataclass(frozen=True)
class ThreeDMInstance:
    """n >= 1, and m >= 1 ordered triples with entries in 1..n (duplicates allowed)."""

    n: int
    triples: tuple[Triple, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if len(self.triples) < 1:
            raise ValueError("need at least one triple")
        for idx, t in enumerate(self.triples, start=1):
            if len(t) != 3 or any(not (1 <= x <= self.n) for x in t):
                raise ValueError(f"triple {idx}: {t} not in [1,{self.n}]^3")

    @property
    def m(self) -> int:
        return len(self.triples)


def parse_3dm(fh: TextIO) -> ThreeDMInstance:
    """Read the `3dm <n> <m>` / `tuple <x> <y> <z>` format.

    `#` comments and blank lines are skipped.  Malformed input raises
    ValueError naming the 1-based line number.
    """
    header: Optional[tuple[int, int]] = None
    triples: list[Triple] = []
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 3 or fields[0] != "3dm":
                raise ValueError(f"line {lineno}: expected '3dm <n> <m>', got {line!r}")
            try:
                header = (int(fields[1]), int(fields[2]))
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer counts") from None
            continue
        if len(fields) != 4 or fields[0] != "tuple":
            raise ValueError(f"line {lineno}: expected 'tuple <x> <y> <z>', got {line!r}")
        try:
            x, y, z = int(fields[1]), int(fields[2]), int(fields[3])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer coordinate") from None
        n = header[0]
        if any(not (1 <= c <= n) for c in (x, y, z)):
            raise ValueError(f"line {lineno}: coordinate outside 1..{n}")
        triples.append((x, y, z))
    if header is None:
        raise ValueError("line 1: missing '3dm <n> <m>' header")
    n, m = header
    if len(triples) != m:
        raise ValueError(f"header declared {m} triples, found {len(triples)}")
    try:
        return ThreeDMInstance(n, tuple(triples))
    except ValueError as exc:
        raise ValueError(str(exc)) from None


def format_3dm(inst: ThreeDMInstance) -> str:
    lines = [f"3dm {inst.n} {inst.m}"]
    lines.extend(f"tuple {x} {y} {z}" for x, y, z in inst.triples)
    return "\n".join(lines) + "\n"


def gen_3dm(n: int, m: int, seed: int, planted: bool = False) -> ThreeDMInstance:
    """Deterministic random instance; identical (n, m, seed) gives identical output.

    planted=True seeds a perfect matching (a random permutation pairing) into
    the first n triples before shuffling, so the instance is guaranteed
    solvable; that requires m >= n.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if planted and m < n:
        raise ValueError(f"planted instance needs m >= n, got m={m} < n={n}")
    rng = random.Random(((seed * 1000003 + n) * 1000003 + m) & (2**63 - 1))
    triples: list[Triple] = []
    if planted:
        ys = list(range(1, n + 1))
        zs = list(range(1, n + 1))
        rng.shuffle(ys)
        rng.shuffle(zs)
        triples.extend((x, ys[x - 1], zs[x - 1]) for x in range(1, n + 1))
    while len(triples) < m:
        triples.append((rng.randint(1, n), rng.randint(1, n), rng.randint(1, n)))
    rng.shuffle(triples)
    return ThreeDMInstance(n, tuple(triples))


def solve_3dm(inst: ThreeDMInstance) -> Optional[tuple[int, ...]]:
    """Exact search for a perfect matching; 1-based triple indices or None.

    Branches on the uncovered first-coordinate value in increasing order, so
    the returned index set is deterministic for a given instance.
    """
    n = inst.n
    by_first: list[list[int]] = [[] for _ in range(n + 1)]
    for idx, (x, _, _) in enumerate(inst.triples):
        by_first[x].append(idx)

    chosen: list[int] = []
    used_y = [False] * (n + 1)
    used_z = [False] * (n + 1)

    def extend(x: int) -> bool:
        if x > n:
            return True
        for idx in by_first[x]:
            _, y, z = inst.triples[idx]
            if used_y[y] or used_z[z]:
                continue
            used_y[y] = used_z[z] = True
            chosen.append(idx)
            if extend(x + 1):
                return True
            chosen.pop()
            used_y[y] = used_z[z] = False
        return False

    if not extend(1):
        return None
    return tuple(i + 1 for i in chosen)


def check_3dm_solution(inst: ThreeDMInstance, indices: tuple[int, ...]) -> bool:
    """True iff the 1-based indices select an exact cover of {1,2,3} x [n]."""
    if len(indices) != inst.n:
        return False
    if any(not (1 <= i <= inst.m) for i in indices):
        return False
    if len(set(indices)) != inst.n:
        return False
    cover = [set(), set(), set()]
    for i in indices:
        for coord, val in enumerate(inst.triples[i - 1]):
            cover[coord].add(val)
    return all(len(c) == inst.n for c in cover)
