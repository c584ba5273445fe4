"""Second reduction stage: multicolored resolving set to metric dimension.

The first-stage graph is extended in place with, per class i and side h in
{1, 2}: an anchor triple (two leaves p, q on a shared neighbor), long detour
paths that equalize p/q distances everywhere outside the class's own
selectors, and forced-choice triangles ("gadgets") pinned all over the
construction.  Every gadget is a triangle of two new degree-2 twins plus a
connector; the twins have identical closed neighborhoods, so any resolving
set must pick one of them.  The target budget k equals one twin per gadget
plus one selector per class, which is what makes the equivalence tight.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, TextIO

from .graphs import (
    CheckReport,
    ConstructionError,
    LabeledGraph,
    add_path,
    anchor,
    connector,
    distance_matrix,
    path_point,
    twin1,
    twin2,
)
from .mrs import (
    MrsInstance,
    build_mrs,
    read_mrs_sidecar,
    verify_mrs_distances,
    write_mrs_sidecar,
)
from .tdm import ThreeDMInstance

AnchorKey = tuple[str, int, int]  # (kind in p/q/pi, class i, side h)
MidKey = tuple[int, int, int]  # (i, j, h)


@dataclass(frozen=True)
class ForcedVertexGadget:
    """Triangle gadget: twins twin1/twin2 plus a connector.

    For most gadgets the connector is an existing path vertex and attached_to
    is just (connector,).  The pair gadgets mint a new connector adjacent to
    four existing vertices, recorded in attached_to.
    """

    gadget_id: str
    twin1: int
    twin2: int
    connector: int
    connector_is_new: bool
    attached_to: tuple[int, ...]


@dataclass
class MdInstance:
    """Second-stage instance: the extended graph plus its bookkeeping."""

    mrs: MrsInstance
    k: int
    gadgets: dict[str, ForcedVertexGadget]
    anchors: dict[AnchorKey, int]
    mids: dict[MidKey, int]

    @property
    def graph(self) -> LabeledGraph:
        return self.mrs.graph

    @property
    def n(self) -> int:
        return self.mrs.n

    @property
    def m(self) -> int:
        return self.mrs.m

    def anchor_id(self, kind: str, i: int, h: int) -> int:
        return self.anchors[(kind, i, h)]

    def pq_pairs(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """((i, h), (p_id, q_id)) for every class and side, sorted."""
        out = []
        for i in range(1, self.n + 1):
            for h in (1, 2):
                out.append(((i, h), (self.anchors[("p", i, h)], self.anchors[("q", i, h)])))
        return out


def _attach_triangle(g: LabeledGraph, gadget_id: str, host: int) -> ForcedVertexGadget:
    t1 = g.add_vertex(twin1(gadget_id))
    t2 = g.add_vertex(twin2(gadget_id))
    g.add_edge(t1, t2)
    g.add_edge(t1, host)
    g.add_edge(t2, host)
    return ForcedVertexGadget(gadget_id, t1, t2, host, False, (host,))


def _attach_pair_gadget(
    g: LabeledGraph, gadget_id: str, attach: tuple[int, int, int, int]
) -> ForcedVertexGadget:
    conn = g.add_vertex(connector(gadget_id))
    t1 = g.add_vertex(twin1(gadget_id))
    t2 = g.add_vertex(twin2(gadget_id))
    g.add_edge(t1, t2)
    g.add_edge(t1, conn)
    g.add_edge(t2, conn)
    for host in attach:
        g.add_edge(conn, host)
    return ForcedVertexGadget(gadget_id, t1, t2, conn, True, attach)


def build_md(inst: ThreeDMInstance, check: bool = True) -> MdInstance:
    """Build the metric-dimension instance on top of a fresh first stage.

    check=True re-verifies the first-stage distance identities on the
    extended graph (the extension must not create shortcuts) plus the anchor
    distances, raising ConstructionError on any violation.
    """
    mrs = build_mrs(inst, check=check)
    g = mrs.graph
    n, m = inst.n, inst.m
    span = 20 * (n + 1)  # detour path length; even, so midpoints are vertices
    half_span = 10 * (n + 1)

    anchors: dict[AnchorKey, int] = {}
    for i in range(1, n + 1):
        for h in (1, 2):
            p_id = g.add_vertex(anchor("p", i, h))
            q_id = g.add_vertex(anchor("q", i, h))
            pi_id = g.add_vertex(anchor("pi", i, h))
            g.add_edge(p_id, pi_id)
            g.add_edge(q_id, pi_id)
            anchors[("p", i, h)] = p_id
            anchors[("q", i, h)] = q_id
            anchors[("pi", i, h)] = pi_id

    # selector-to-p paths (both sides, before any detour references them)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            for h in (1, 2):
                add_path(
                    g, mrs.selector_id(i, j), anchors[("p", i, h)], span,
                    f"P(s[{i},{j}],p[{i},{h}])",
                )

    # detour paths: from pi[i,h] to the selector-side neighbor on each of the
    # nine hub paths and on the opposite-side p path
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            for h in (1, 2):
                pi_id = anchors[("pi", i, h)]
                for letter in ("a", "b", "c"):
                    for r in (1, 2, 3):
                        nbr = path_point(g, f"P(s[{i},{j}],{letter}[{r}])", 1)
                        add_path(g, pi_id, nbr, span, f"P[{h}]({i},{j},{letter}[{r}])")
                nbr = path_point(g, f"P(s[{i},{j}],p[{i},{3 - h}])", 1)
                add_path(g, pi_id, nbr, span, f"P[{h}]({i},{j},p[{i},{3 - h}])")

    # pi-to-hub paths, half the detour length
    for i in range(1, n + 1):
        for h in (1, 2):
            pi_id = anchors[("pi", i, h)]
            for r in (1, 2, 3):
                for letter in ("a", "c"):
                    add_path(
                        g, pi_id, mrs.hubs[f"{letter}[{r}]"], half_span,
                        f"P(pi[{i},{h}],{letter}[{r}])",
                    )

    mids: dict[MidKey, int] = {}
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            for h in (1, 2):
                mids[(i, j, h)] = path_point(g, f"P[{h}]({i},{j},p[{i},{3 - h}])", half_span)

    # q-to-midpoint paths; one unit short of 30(n+1) so only the own-class
    # selectors see a p/q difference
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            for h in (1, 2):
                add_path(
                    g, anchors[("q", i, h)], mids[(i, j, 3 - h)], 30 * (n + 1) - 1,
                    f"L({i},{j},{h})",
                )

    gadgets: dict[str, ForcedVertexGadget] = {}

    def place(gadget: ForcedVertexGadget) -> None:
        if gadget.gadget_id in gadgets:
            raise ConstructionError(f"duplicate gadget id {gadget.gadget_id}")
        gadgets[gadget.gadget_id] = gadget

    for i in range(1, n + 1):
        for j in range(1, m + 1):
            for h in (1, 2):
                for letter in ("a", "b", "c"):
                    for r in (1, 2, 3):
                        pid = f"P[{h}]({i},{j},{letter}[{r}])"
                        place(_attach_triangle(
                            g, f"F[{h}]({i},{j},{letter}[{r}])", path_point(g, pid, 1)
                        ))
                pid = f"P[{h}]({i},{j},p[{i},{3 - h}])"
                place(_attach_triangle(
                    g, f"F[{h}]({i},{j},p[{i},{3 - h}])", path_point(g, pid, 1)
                ))
                place(_attach_triangle(g, f"Fmid({i},{j},{h})", mids[(i, j, h)]))
                for r in (1, 2, 3):
                    pid = f"P[{h}]({i},{j},a[{r}])"
                    place(_attach_triangle(
                        g, f"Fecc({i},{j},{h},{r})", path_point(g, pid, half_span + 1)
                    ))
            for r in (1, 2, 3):
                for letter in ("a", "c"):
                    pid = f"P(s[{i},{j}],{letter}[{r}])"
                    info = g.paths[pid]
                    place(_attach_triangle(
                        g, f"F(s[{i},{j}],{letter}[{r}])",
                        path_point(g, pid, info.length - 1),
                    ))

    for i in range(1, n + 1):
        for h in (1, 2):
            for r in (1, 2, 3):
                for letter in ("a", "c"):
                    pid = f"P(pi[{i},{h}],{letter}[{r}])"
                    info = g.paths[pid]
                    place(_attach_triangle(
                        g, f"F(pi[{i},{h}],{letter}[{r}])",
                        path_point(g, pid, info.length - 1),
                    ))

    for r in (1, 2, 3):
        for x in range(1, n + 1):
            u_id, v_id = mrs.pairs[(r, x)]
            pa = f"P(a[{r}],u[{r},{x}])"
            pc = f"P(c[{r}],u[{r},{x}])"
            la, lc = g.paths[pa].length, g.paths[pc].length
            place(_attach_pair_gadget(
                g, f"F1(u[{r},{x}])",
                (u_id, v_id, path_point(g, pa, la - 1), path_point(g, pc, lc - 1)),
            ))
            place(_attach_pair_gadget(
                g, f"F2(u[{r},{x}])",
                (u_id, v_id, path_point(g, pa, la - 2), path_point(g, pc, lc - 2)),
            ))

    k = 34 * n * m + 19 * n
    md = MdInstance(mrs, k, gadgets, anchors, mids)

    structural = _verify_md_structure(md)
    if not structural.ok:
        head = "; ".join(structural.violations[:5])
        raise ConstructionError(f"structure self-check failed: {head}")
    if check:
        report = verify_md_distances(md, inst)
        if not report.ok:
            head = "; ".join(report.violations[:5])
            raise ConstructionError(
                f"distance self-check failed ({len(report.violations)} violations): {head}"
            )
    return md


def _verify_md_structure(md: MdInstance) -> CheckReport:
    """Cheap invariants: counts, twin degrees, connector degrees, budget."""
    report = CheckReport("md-structure")
    g, n, m = md.graph, md.n, md.m
    report.require(
        len(md.gadgets) == 34 * n * m + 18 * n,
        f"gadget count {len(md.gadgets)}, want {34 * n * m + 18 * n}",
    )
    report.require(md.k == 34 * n * m + 19 * n, f"k = {md.k}, want {34 * n * m + 19 * n}")
    for gid, gadget in md.gadgets.items():
        for t in (gadget.twin1, gadget.twin2):
            report.require(g.degree(t) == 2, f"{gid}: twin {t} has degree {g.degree(t)}")
        report.require(
            g.has_edge(gadget.twin1, gadget.twin2), f"{gid}: twins not adjacent"
        )
        if gadget.connector_is_new:
            report.require(
                g.degree(gadget.connector) == 6,
                f"{gid}: new connector degree {g.degree(gadget.connector)}",
            )
            report.require(len(gadget.attached_to) == 4, f"{gid}: want 4 attachments")
    for (i, j, h), mid in md.mids.items():
        lb = g.label(mid)
        report.require(
            lb.kind == "pv" and lb.args[0] == f"P[{h}]({i},{j},p[{i},{3 - h}])",
            f"mid({i},{j},{h}) mislabeled as {lb}",
        )
    return report


def verify_md_distances(md: MdInstance, src: ThreeDMInstance) -> CheckReport:
    """BFS re-check on the extended graph: no shortcut broke stage one.

    Also pins the anchor distances every own-class selector must see:
    dist(s, p) = 20(n+1) and dist(s, q) = 20(n+1) + 2.
    """
    report = verify_mrs_distances(md.mrs, src)
    report.name = "md-distances"
    span = 20 * (md.n + 1)
    sources = [md.anchor_id(kind, i, h) for kind in ("p", "q")
               for i in range(1, md.n + 1) for h in (1, 2)]
    dmat = distance_matrix(md.graph, sources)
    row = {vid: idx for idx, vid in enumerate(sources)}
    for i in range(1, md.n + 1):
        for h in (1, 2):
            prow = dmat[row[md.anchor_id("p", i, h)]]
            qrow = dmat[row[md.anchor_id("q", i, h)]]
            for j in range(1, md.m + 1):
                s_id = md.mrs.selector_id(i, j)
                dp, dq = int(prow[s_id]), int(qrow[s_id])
                report.require(
                    dp == span, f"dist(s[{i},{j}],p[{i},{h}]) = {dp}, want {span}"
                )
                report.require(
                    dq == span + 2, f"dist(s[{i},{j}],q[{i},{h}]) = {dq}, want {span + 2}"
                )
    return report


def verify_distance_preservation(md: MdInstance, src: ThreeDMInstance) -> CheckReport:
    """Selector-to-pair distances agree between a fresh stage-one graph and G'.

    Rebuilds the first stage from the 3DM instance and compares BFS results,
    so the check shares no state with the extension under test.
    """
    report = CheckReport("distance-preservation")
    fresh = build_mrs(src, check=False)
    keys = fresh.pair_keys()

    def pair_rows(mrs: MrsInstance):
        ids = [vid for key in keys for vid in mrs.pairs[key]]
        return distance_matrix(mrs.graph, ids)

    base = pair_rows(fresh)
    ext = pair_rows(md.mrs)
    for kidx, (r, x) in enumerate(keys):
        for endpoint, letter in ((2 * kidx, "u"), (2 * kidx + 1, "v")):
            for i in range(1, md.n + 1):
                for j in range(1, md.m + 1):
                    want = int(base[endpoint, fresh.selector_id(i, j)])
                    got = int(ext[endpoint, md.mrs.selector_id(i, j)])
                    report.require(
                        got == want,
                        f"dist({letter}[{r},{x}],s[{i},{j}]): {got} in extension, "
                        f"{want} in stage one",
                    )
    return report


def md_stats(md: MdInstance) -> dict[str, int]:
    """Headline numbers for reports and the command-line interface."""
    g = md.graph
    return {
        "n": md.n,
        "m": md.m,
        "M": md.mrs.M,
        "vertices": g.vertex_count,
        "edges": g.edge_count,
        "gadgets": len(md.gadgets),
        "paths": len(g.paths),
        "k": md.k,
    }


# ---------------------------------------------------------------------------
# sidecar serialization

def write_md_sidecar(md: MdInstance, fh: TextIO) -> None:
    """One self-contained sidecar: first-stage lines, then the extension."""
    write_mrs_sidecar(md.mrs, fh)
    fh.write(f"param k {md.k}\n")
    for (kind, i, h) in sorted(md.anchors):
        fh.write(f"anchor {kind} {i} {h} {md.anchors[(kind, i, h)]}\n")
    for (i, j, h) in sorted(md.mids):
        fh.write(f"mid {i} {j} {h} {md.mids[(i, j, h)]}\n")
    for gid, gadget in md.gadgets.items():
        fh.write(f"twin {gid} {gadget.twin1} {gadget.twin2} {gadget.connector}\n")


def read_md_sidecar(fh: TextIO, g: LabeledGraph) -> MdInstance:
    """Rebuild an MdInstance from its sidecar against a loaded graph.

    The first-stage directives embedded in the file reconstruct the
    MrsInstance.  Twin and connector roles are re-derived from labels;
    attachment lists come from the connector's neighborhoods, so a
    consistent instance can be reconstructed from the serialized graph
    alone.
    """
    first_stage: list[str] = []
    extension: list[tuple[int, str]] = []
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            first_stage.append("")
            continue
        fields = line.split()
        if fields[0] in ("hub", "xset", "pair") or (
            fields[0] == "param" and len(fields) > 1 and fields[1] in ("n", "M")
        ):
            first_stage.append(line)
        else:
            first_stage.append("")
            extension.append((lineno, line))
    # blank placeholders keep original line numbers in first-stage errors
    mrs = read_mrs_sidecar(io.StringIO("\n".join(first_stage) + "\n"), g)

    k: Optional[int] = None
    anchors: dict[AnchorKey, int] = {}
    mids: dict[MidKey, int] = {}
    gadgets: dict[str, ForcedVertexGadget] = {}

    def vid(token: str, lineno: int) -> int:
        try:
            v = int(token)
        except ValueError:
            raise ValueError(f"sidecar line {lineno}: non-integer id {token!r}") from None
        if not (0 <= v < g.vertex_count):
            raise ValueError(f"sidecar line {lineno}: id {v} out of range")
        return v

    for lineno, line in extension:
        fields = line.split()
        kind = fields[0]
        if kind == "param":
            if len(fields) != 3 or fields[1] != "k":
                raise ValueError(f"sidecar line {lineno}: expected 'param k <int>'")
            k = int(fields[2])
        elif kind == "anchor":
            if len(fields) != 5 or fields[1] not in ("p", "q", "pi"):
                raise ValueError(f"sidecar line {lineno}: expected 'anchor p|q|pi <i> <h> <id>'")
            akind, i, h = fields[1], int(fields[2]), int(fields[3])
            v = vid(fields[4], lineno)
            if g.label(v) != anchor(akind, i, h):
                raise ValueError(
                    f"sidecar line {lineno}: vertex {v} is {g.label(v)}, "
                    f"not the {akind}[{i},{h}] anchor"
                )
            if (akind, i, h) in anchors:
                raise ValueError(f"sidecar line {lineno}: duplicate anchor")
            anchors[(akind, i, h)] = v
        elif kind == "mid":
            if len(fields) != 5:
                raise ValueError(f"sidecar line {lineno}: expected 'mid <i> <j> <h> <id>'")
            i, j, h = int(fields[1]), int(fields[2]), int(fields[3])
            v = vid(fields[4], lineno)
            lb = g.label(v)
            if lb.kind != "pv" or lb.args[0] != f"P[{h}]({i},{j},p[{i},{3 - h}])":
                raise ValueError(f"sidecar line {lineno}: vertex {v} is not that midpoint")
            mids[(i, j, h)] = v
        elif kind == "twin":
            if len(fields) != 5:
                raise ValueError(f"sidecar line {lineno}: expected 'twin <gid> <t1> <t2> <conn>'")
            gid = fields[1]
            if gid in gadgets:
                raise ValueError(f"sidecar line {lineno}: duplicate gadget {gid}")
            t1, t2, conn = (vid(tok, lineno) for tok in fields[2:5])
            if g.label(t1) != twin1(gid) or g.label(t2) != twin2(gid):
                raise ValueError(f"sidecar line {lineno}: twins mislabeled for {gid}")
            is_new = g.label(conn) == connector(gid)
            if is_new:
                attach = tuple(x for x in g.neighbors(conn) if x not in (t1, t2))
            else:
                attach = (conn,)
            gadgets[gid] = ForcedVertexGadget(gid, t1, t2, conn, is_new, attach)
        else:
            raise ValueError(f"sidecar line {lineno}: unknown directive {kind!r}")

    if k is None:
        raise ValueError("sidecar: missing param k")
    n, m = mrs.n, mrs.m
    want_anchors = {(kind, i, h) for kind in ("p", "q", "pi")
                    for i in range(1, n + 1) for h in (1, 2)}
    if set(anchors) != want_anchors:
        raise ValueError("sidecar: anchor lines incomplete")
    want_mids = {(i, j, h) for i in range(1, n + 1)
                 for j in range(1, m + 1) for h in (1, 2)}
    if set(mids) != want_mids:
        raise ValueError("sidecar: mid lines incomplete")
    if k != len(gadgets) + n:
        raise ValueError(f"sidecar: k = {k} but gadgets+n = {len(gadgets) + n}")
    return MdInstance(mrs, k, gadgets, anchors, mids)
