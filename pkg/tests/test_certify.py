"""Certificates: forced twins, anchor-pair classification, yes/no directions."""
import pytest

from mdreduce.certify import (
    EQUIV_MAX_M,
    EQUIV_MAX_N,
    candidate_resolving_set,
    certify_no,
    certify_yes,
    classify_pq,
    equivalence_check,
    no_fact_lines,
    region_of,
    verify_forced_set_lemma,
    verify_forced_vertex_lemma,
    verify_pair_resolvers,
    verify_twins_forced,
    yes_fact_lines,
)
from mdreduce.graphs import CapacityError, twin1, twin2
from mdreduce.md import build_md
from mdreduce.tdm import ThreeDMInstance, gen_3dm, solve_3dm

TINY = ThreeDMInstance(1, ((1, 1, 1),))

# no perfect matching: first coordinate value 2 appears only once, and that
# triple collides with every completion on the other coordinates
NO_INSTANCE = ThreeDMInstance(2, ((1, 1, 1), (1, 2, 2), (2, 1, 2)))


@pytest.fixture(scope="module")
def tiny_md():
    return build_md(TINY)


@pytest.fixture(scope="module")
def no_md():
    assert solve_3dm(NO_INSTANCE) is None
    return build_md(NO_INSTANCE)


# -- regions -------------------------------------------------------------------

def test_region_classification(tiny_md):
    md = tiny_md
    g = md.graph
    assert region_of(md, md.mrs.selector_id(1, 1)) == "X"
    assert region_of(md, md.mrs.hubs["a[1]"]) == "W"
    u_id, v_id = md.mrs.pairs[(1, 1)]
    assert region_of(md, u_id) == "R"
    assert region_of(md, v_id) == "R"
    assert region_of(md, md.anchor_id("p", 1, 1)) == "U"
    assert region_of(md, md.anchor_id("q", 1, 1)) == "L"
    assert region_of(md, md.anchor_id("pi", 1, 1)) == "Pi"
    from mdreduce.graphs import path_point

    assert region_of(md, path_point(g, "P(s[1,1],p[1,1])", 5)) == "U"
    assert region_of(md, path_point(g, "P(s[1,1],a[2])", 5)) == "H"
    assert region_of(md, path_point(g, "P[1](1,1,a[1])", 5)) == "Pi"
    assert region_of(md, path_point(g, "P(pi[1,2],c[3])", 5)) == "S"
    assert region_of(md, path_point(g, "L(1,1,1)", 5)) == "L"
    assert region_of(md, path_point(g, "P(b[2],u[2,1])", 5)) == "R"
    gadget = md.gadgets["Fmid(1,1,1)"]
    assert region_of(md, gadget.twin1) == "F"


# -- anchor-pair classification ---------------------------------------------------

def test_classify_pq_selector_and_gadget_flags(tiny_md):
    md = tiny_md
    cls = classify_pq(md)
    sel = cls[md.mrs.selector_id(1, 1)]
    assert sel.selector_class == 1
    assert sel.resolved_pairs == ((1, 1), (1, 2))
    gadget = md.gadgets["F[1](1,1,a[1])"]
    assert cls[gadget.twin1].is_gadget
    assert cls[gadget.twin1].resolved_pairs == ()
    p_cls = cls[md.anchor_id("p", 1, 1)]
    assert p_cls.selector_class is None and not p_cls.is_gadget
    assert p_cls.resolved_pairs == ((1, 1),)


@pytest.mark.parametrize("n,m,seed", [(1, 2, 0), (2, 2, 1)])
def test_forced_set_lemma_holds(n, m, seed):
    inst = gen_3dm(n, m, seed=seed, planted=True)
    md = build_md(inst)
    report = verify_forced_set_lemma(md)
    assert report.ok, report.violations[:3]
    assert report.checks == md.graph.vertex_count


def test_forced_set_lemma_catches_planted_resolver():
    md = build_md(TINY)  # fresh copy: this test mutates the graph
    # wiring a real gadget twin next to p makes it resolve that anchor pair,
    # violating the gadget clause
    gadget = md.gadgets["Fmid(1,1,1)"]
    md.graph.add_edge(gadget.twin1, md.anchor_id("p", 1, 1))
    report = verify_forced_set_lemma(md)
    assert not report.ok
    assert any(v.startswith("b:") for v in report.violations)


@pytest.mark.parametrize("n,m,seed", [(1, 2, 2), (2, 2, 3)])
def test_forced_vertex_lemma_holds(n, m, seed):
    inst = gen_3dm(n, m, seed=seed, planted=True)
    md = build_md(inst)
    report = verify_forced_vertex_lemma(md)
    assert report.ok, report.violations[:3]
    assert report.checks == len(md.gadgets) * 3 * n


def test_forced_vertex_lemma_catches_shortcut():
    md = build_md(TINY)
    u_id, _ = md.mrs.pairs[(1, 1)]
    gadget = md.gadgets["F(s[1,1],a[1])"]
    md.graph.add_edge(gadget.twin1, u_id)
    report = verify_forced_vertex_lemma(md)
    assert not report.ok
    assert any("F(s[1,1],a[1])" in v for v in report.violations)


def test_twins_forced_holds(tiny_md):
    report = verify_twins_forced(tiny_md)
    assert report.ok
    assert report.checks == len(tiny_md.gadgets)


def test_twins_forced_catches_asymmetry():
    md = build_md(TINY)
    gadget = md.gadgets["Fmid(1,1,2)"]
    md.graph.add_edge(gadget.twin1, md.mrs.selector_id(1, 1))
    report = verify_twins_forced(md)
    assert not report.ok
    assert any("Fmid(1,1,2)" in v for v in report.violations)


def test_pair_resolvers_holds(no_md):
    report = verify_pair_resolvers(no_md, NO_INSTANCE)
    assert report.ok, report.violations[:3]


def test_pair_resolvers_catches_gadget_leak():
    md = build_md(TINY)
    u_id, _ = md.mrs.pairs[(1, 1)]
    gadget = md.gadgets["Fecc(1,1,1,1)"]
    md.graph.add_edge(gadget.twin2, u_id)
    report = verify_pair_resolvers(md, TINY)
    assert not report.ok


# -- yes certificates ------------------------------------------------------------

def test_candidate_set_size_is_k(tiny_md):
    chosen = candidate_resolving_set(tiny_md, (1,))
    assert len(chosen) == len(set(chosen)) == tiny_md.k


@pytest.mark.parametrize("n,m,seed", [(1, 1, 0), (1, 2, 1), (2, 2, 2)])
def test_certify_yes_on_planted(n, m, seed):
    inst = gen_3dm(n, m, seed=seed, planted=True)
    md = build_md(inst)
    cert = certify_yes(md, inst)
    assert cert.ok
    assert cert.set_size == md.k
    assert cert.selection is not None


def test_certify_yes_rejects_no_instance(no_md):
    cert = certify_yes(no_md, NO_INSTANCE)
    assert not cert.ok
    assert "no perfect matching" in cert.reason


def test_certify_yes_reports_witness_with_regions():
    md = build_md(TINY)
    g = md.graph
    # two open twins hanging off a hub: nothing in the candidate set tells
    # them apart, so the certificate must fail and name them
    f1 = g.add_vertex(twin1("Fake(2)"))
    f2 = g.add_vertex(twin2("Fake(2)"))
    g.add_edge(f1, md.mrs.hubs["a[1]"])
    g.add_edge(f2, md.mrs.hubs["a[1]"])
    cert = certify_yes(md, TINY)
    assert not cert.ok
    assert set(cert.witness) == {f1, f2}
    assert cert.witness_regions == ("F", "F")
    assert "unresolved pair" in cert.reason


def test_yes_fact_lines(tiny_md):
    cert = certify_yes(tiny_md, TINY)
    lines = yes_fact_lines(cert)
    assert f"fact budget pass {tiny_md.k} {tiny_md.k}" in lines
    assert "fact matching pass 1" in lines
    assert "fact resolving pass" in lines


# -- no certificates ---------------------------------------------------------------

def test_certify_no_on_curated_instance(no_md):
    cert = certify_no(no_md, NO_INSTANCE)
    assert cert.ok
    assert set(cert.facts) == {"twins-forced", "pq-classification", "pair-resolvers"}
    assert all(report.ok for report in cert.facts.values())
    assert cert.refutation is None
    assert cert.chain
    assert any(f"k = {no_md.k}" in line for line in cert.chain)


def test_certify_no_refuted_by_matching(tiny_md):
    cert = certify_no(tiny_md, TINY)
    assert not cert.ok
    assert cert.refutation == (1,)


def test_no_fact_lines(no_md):
    cert = certify_no(no_md, NO_INSTANCE)
    lines = no_fact_lines(cert)
    assert "fact twins-forced pass" in lines
    assert "fact pq-classification pass" in lines
    assert "fact pair-resolvers pass" in lines
    assert "fact no-cover pass" in lines


def test_no_fact_lines_refuted(tiny_md):
    cert = certify_no(tiny_md, TINY)
    lines = no_fact_lines(cert)
    assert "fact no-cover fail 1" in lines


# -- equivalence -------------------------------------------------------------------

def test_equivalence_yes_side():
    report = equivalence_check(gen_3dm(1, 2, seed=9, planted=True))
    assert report.consistent and report.is_yes
    assert report.yes_cert.ok


def test_equivalence_no_side():
    report = equivalence_check(NO_INSTANCE)
    assert report.consistent and not report.is_yes
    assert report.no_cert.ok


def test_equivalence_capacity_guard():
    big_n = ThreeDMInstance(
        EQUIV_MAX_N + 1, tuple((x, x, x) for x in range(1, EQUIV_MAX_N + 2))
    )
    with pytest.raises(CapacityError):
        equivalence_check(big_n)
    wide = ThreeDMInstance(1, ((1, 1, 1),) * (EQUIV_MAX_M + 1))
    with pytest.raises(CapacityError):
        equivalence_check(wide)
