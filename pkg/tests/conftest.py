"""Shared instance corpus for the heavier verification suites.

Built once per session: a mixed planted/random batch of matching instances
within the exhaustive-verification guards (n at most 3, m at most 6), plus
hand-built unsolvable instances whose unsolvability is asserted here so no
downstream test can silently rely on a wrong premise.
"""
import pytest

from mdreduce.md import build_md
from mdreduce.mrs import build_mrs
from mdreduce.tdm import ThreeDMInstance, gen_3dm, solve_3dm

# (n, m, seed) triples; planted entries carry an embedded perfect matching
PLANTED_SHAPES = [
    (1, 1, 11), (1, 2, 12), (1, 3, 13), (1, 4, 14), (1, 6, 16),
    (2, 2, 22), (2, 3, 23), (2, 4, 24), (2, 5, 25), (2, 6, 26),
    (3, 3, 33), (3, 4, 34), (3, 5, 35), (3, 6, 36),
]
RANDOM_SHAPES = [
    (1, 2, 41), (1, 5, 42), (2, 3, 43), (2, 6, 44),
    (3, 4, 45), (3, 5, 46), (3, 6, 47),
]

# hand-built: each instance misses some coordinate value or forces a clash
CURATED_NO = [
    ("no-clash-2", ThreeDMInstance(2, ((1, 1, 1), (1, 2, 2), (2, 1, 2)))),
    ("no-x2-2", ThreeDMInstance(2, ((1, 1, 1), (1, 1, 2), (1, 2, 1), (1, 2, 2)))),
    ("no-z2-2", ThreeDMInstance(2, ((1, 1, 1), (2, 2, 1), (1, 2, 1), (2, 1, 1)))),
    ("no-clash-3", ThreeDMInstance(
        3, ((1, 1, 1), (2, 2, 2), (1, 2, 3), (2, 1, 3), (3, 3, 1)))),
    ("no-z3-3", ThreeDMInstance(
        3, ((1, 1, 1), (2, 2, 2), (3, 3, 1), (1, 2, 2), (2, 3, 1), (3, 1, 2)))),
]


def _corpus_instances():
    out = []
    for n, m, seed in PLANTED_SHAPES:
        out.append((f"planted-{n}-{m}", gen_3dm(n, m, seed, planted=True)))
    for n, m, seed in RANDOM_SHAPES:
        out.append((f"random-{n}-{m}-{seed}", gen_3dm(n, m, seed)))
    return out


@pytest.fixture(scope="session")
def corpus():
    instances = _corpus_instances()
    assert len(instances) >= 20
    return instances


@pytest.fixture(scope="session")
def corpus_mrs(corpus):
    return {name: build_mrs(inst, check=False) for name, inst in corpus}


@pytest.fixture(scope="session")
def corpus_md(corpus):
    return {name: build_md(inst, check=False) for name, inst in corpus}


@pytest.fixture(scope="session")
def planted_yes(corpus):
    """Planted instances in the certified-yes regime (3 <= m <= 6)."""
    chosen = [(name, inst) for name, inst in corpus
              if name.startswith("planted-") and 3 <= inst.m <= 6]
    assert len(chosen) >= 8
    return chosen


@pytest.fixture(scope="session")
def curated_no():
    for name, inst in CURATED_NO:
        assert solve_3dm(inst) is None, f"{name} is unexpectedly solvable"
    return CURATED_NO
