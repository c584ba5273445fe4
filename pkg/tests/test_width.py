"""Node-search verification against a from-scratch simulator, plus synthesis."""
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdreduce.graphs import validate_path_decomposition
from mdreduce.md import build_md
from mdreduce.tdm import ThreeDMInstance, gen_3dm
from mdreduce.width import (
    Move,
    parse_strategy,
    strategy_to_decomposition,
    synth_strategy,
    verify_strategy,
    write_strategy,
)
from tests.test_graphs import complete_graph, cycle_graph, path_graph, plain_graph


def reference_simulate(g, moves):
    """Independent oracle: recompute the recontamination fixpoint from
    scratch after every move and report per-step cleared counts."""
    occupied = set()
    cleared = set()
    counts = []
    for move in moves:
        if move.place:
            occupied.add(move.vertex)
            for w in g.neighbors(move.vertex):
                if w in occupied:
                    cleared.add(tuple(sorted((move.vertex, w))))
        else:
            occupied.remove(move.vertex)
        # full fixpoint: dirty unoccupied vertices eat cleared edges
        while True:
            dirty = set()
            for (x, y) in g.edges():
                if (x, y) not in cleared:
                    for w in (x, y):
                        if w not in occupied:
                            dirty.add(w)
            shrink = {
                e for e in cleared if e[0] in dirty or e[1] in dirty
            }
            if not shrink:
                break
            cleared -= shrink
        counts.append(len(cleared))
    return counts


def placements(moves):
    return [m.vertex for m in moves if m.place]


# -- verification on known graphs ---------------------------------------------

def test_path_graph_two_searchers():
    g = path_graph(5)
    moves = [Move(True, 0)]
    for v in range(1, 5):
        moves.append(Move(True, v))
        moves.append(Move(False, v - 1))
    moves.append(Move(False, 4))
    trace = verify_strategy(g, moves)
    assert trace.max_searchers == 2
    assert trace.ok
    assert trace.steps[-1] == (0, 4, False)


def test_star_two_searchers():
    g = plain_graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    moves = [Move(True, 0)]
    for leaf in (1, 2, 3, 4):
        moves.append(Move(True, leaf))
        moves.append(Move(False, leaf))
    moves.append(Move(False, 0))
    trace = verify_strategy(g, moves)
    assert trace.max_searchers == 2 and trace.ok


def test_cycle_needs_three():
    g = cycle_graph(4)
    moves = [
        Move(True, 0), Move(True, 1), Move(True, 3), Move(False, 0),
        Move(True, 2), Move(False, 1), Move(False, 2), Move(False, 3),
    ]
    trace = verify_strategy(g, moves)
    assert trace.max_searchers == 3 and trace.ok


def test_complete_graph_needs_all():
    g = complete_graph(4)
    moves = [Move(True, v) for v in range(4)] + [Move(False, v) for v in range(4)]
    trace = verify_strategy(g, moves)
    assert trace.max_searchers == 4 and trace.ok


def test_recontamination_detected():
    g = path_graph(4)
    moves = [Move(True, 0), Move(True, 1), Move(False, 1), Move(False, 0)]
    trace = verify_strategy(g, moves)
    assert not trace.monotone
    assert not trace.all_cleared
    # removing 1 next to the contaminated edge (1,2) floods edge (0,1)
    assert trace.steps[2] == (1, 0, True)


def test_retreat_without_dirt_is_safe():
    g = path_graph(3)
    moves = [
        Move(True, 0), Move(True, 1), Move(False, 0), Move(True, 2),
        Move(False, 1), Move(False, 2),
    ]
    trace = verify_strategy(g, moves)
    assert trace.ok and trace.max_searchers == 2


def test_smoothness_flag():
    g = path_graph(3)
    moves = [
        Move(True, 0), Move(True, 1), Move(False, 0), Move(True, 2),
        Move(False, 2), Move(True, 2), Move(False, 1), Move(False, 2),
    ]
    trace = verify_strategy(g, moves)
    assert not trace.smooth


def test_protocol_violations():
    g = path_graph(3)
    with pytest.raises(ValueError):
        verify_strategy(g, [Move(True, 0), Move(True, 0)])
    with pytest.raises(ValueError):
        verify_strategy(g, [Move(False, 0)])
    with pytest.raises(ValueError):
        verify_strategy(g, [Move(True, 99)])


@st.composite
def graph_and_strategy(draw):
    n = draw(st.integers(min_value=2, max_value=10))
    all_edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = sorted(draw(st.sets(st.sampled_from(all_edges), max_size=len(all_edges))))
    g = plain_graph(n, edges)
    moves = []
    occupied = []
    for _ in range(draw(st.integers(min_value=0, max_value=3 * n))):
        can_remove = bool(occupied)
        free = [v for v in range(n) if v not in occupied]
        if can_remove and (not free or draw(st.booleans())):
            v = draw(st.sampled_from(occupied))
            occupied.remove(v)
            moves.append(Move(False, v))
        elif free:
            v = draw(st.sampled_from(free))
            occupied.append(v)
            moves.append(Move(True, v))
    return g, moves


@given(graph_and_strategy())
@settings(max_examples=120, deadline=None)
def test_incremental_matches_reference_closure(gs):
    g, moves = gs
    trace = verify_strategy(g, moves)
    want = reference_simulate(g, moves)
    assert [step[1] for step in trace.steps] == want


# -- decompositions ---------------------------------------------------------------

def test_decomposition_from_path_sweep():
    g = path_graph(4)
    moves = [Move(True, 0)]
    for v in range(1, 4):
        moves.append(Move(True, v))
        moves.append(Move(False, v - 1))
    moves.append(Move(False, 3))
    bags = strategy_to_decomposition(g, moves)
    assert len(bags) == len(moves)
    res = validate_path_decomposition(g, bags)
    assert res.ok and res.width == 1


def test_decomposition_rejects_protocol_violation():
    g = path_graph(3)
    with pytest.raises(ValueError):
        strategy_to_decomposition(g, [Move(False, 0)])


# -- synthesis ----------------------------------------------------------------------

@pytest.mark.parametrize("n,m", [(1, 1), (1, 2), (2, 2)])
def test_synthesized_strategy_is_clean_and_small(n, m):
    inst = gen_3dm(n, m, seed=3, planted=(m >= n))
    md = build_md(inst, check=False)
    moves = synth_strategy(md)
    trace = verify_strategy(md.graph, moves)
    assert trace.ok
    assert trace.max_searchers == 23
    assert sorted(placements(moves)) == list(md.graph.vertices())


def test_synthesized_decomposition_validates_at_width_22():
    inst = ThreeDMInstance(1, ((1, 1, 1),))
    md = build_md(inst, check=False)
    moves = synth_strategy(md)
    bags = strategy_to_decomposition(md.graph, moves)
    res = validate_path_decomposition(md.graph, bags)
    assert res.ok
    assert res.width == 22


# -- strategy files --------------------------------------------------------------

def test_strategy_round_trip():
    moves = [Move(True, 3), Move(True, 1), Move(False, 3)]
    buf = io.StringIO()
    write_strategy(moves, buf)
    assert buf.getvalue() == "+ 3\n+ 1\n- 3\n"
    buf.seek(0)
    assert parse_strategy(buf) == moves


def test_strategy_parse_skips_comments():
    moves = parse_strategy(io.StringIO("# hi\n+ 2\n\n- 2  # done\n"))
    assert moves == [Move(True, 2), Move(False, 2)]


@pytest.mark.parametrize("bad", ["x 1", "+", "+ two", "+ 1 2"])
def test_strategy_parse_rejects_malformed(bad):
    with pytest.raises(ValueError):
        parse_strategy(io.StringIO(bad + "\n"))
