"""Plain-text serialization for labeled graphs.

Graph file: a `g <V> <E>` header line followed by one `e <u> <w>` line per
edge with 0-based ids and u < w.  Label file: one `<id>\t<label>` line per
vertex.  Blank lines and `#` comments are allowed in both.  Writers emit
sorted, comment-free output so equal graphs serialize byte-identically.
"""
from __future__ import annotations

from typing import Iterable, Optional, TextIO

from .graphs import Label, LabeledGraph, format_label, parse_label, path_vertex


class FormatError(ValueError):
    """Malformed input file; message carries the 1-based line number."""


def _content_lines(lines: Iterable[str]) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def write_graph(g: LabeledGraph, fh: TextIO) -> None:
    fh.write(f"g {g.vertex_count} {g.edge_count}\n")
    for u, w in g.edges():
        fh.write(f"e {u} {w}\n")


def write_labels(g: LabeledGraph, fh: TextIO) -> None:
    for v in g.vertices():
        fh.write(f"{v}\t{format_label(g.label(v))}\n")


def read_graph(fh: TextIO, labels_fh: Optional[TextIO] = None) -> LabeledGraph:
    """Parse a graph file plus its label file into a LabeledGraph.

    The label file must cover ids 0..V-1 exactly once each.  The path
    registry is not reconstructed: pv labels keep their path id and offset,
    but readers work from edges and labels alone.  Without a label file
    every vertex i gets the placeholder label pv[v,i].
    """
    it = _content_lines(fh)
    try:
        lineno, header = next(it)
    except StopIteration:
        raise FormatError("graph file: line 1: missing 'g' header") from None
    parts = header.split()
    if len(parts) != 3 or parts[0] != "g":
        raise FormatError(f"graph file: line {lineno}: expected 'g <V> <E>', got {header!r}")
    try:
        n_vertices, n_edges = int(parts[1]), int(parts[2])
    except ValueError:
        raise FormatError(f"graph file: line {lineno}: non-integer counts in {header!r}") from None
    if n_vertices < 0 or n_edges < 0:
        raise FormatError(f"graph file: line {lineno}: negative counts")

    labels: dict[int, Label] = {}
    if labels_fh is None:
        labels = {v: path_vertex("v", v) for v in range(n_vertices)}
    else:
        labels.update(_read_labels(labels_fh, n_vertices))
    if len(labels) != n_vertices:
        missing = next(v for v in range(n_vertices) if v not in labels)
        raise FormatError(f"label file: no label for vertex {missing}")

    g = LabeledGraph()
    for vid in range(n_vertices):
        g.add_vertex(labels[vid])

    seen_edges = 0
    for lineno, line in it:
        fields = line.split()
        if len(fields) != 3 or fields[0] != "e":
            raise FormatError(f"graph file: line {lineno}: expected 'e <u> <w>', got {line!r}")
        try:
            u, w = int(fields[1]), int(fields[2])
        except ValueError:
            raise FormatError(f"graph file: line {lineno}: non-integer endpoint") from None
        if not (0 <= u < n_vertices and 0 <= w < n_vertices):
            raise FormatError(f"graph file: line {lineno}: endpoint out of range")
        if u >= w:
            raise FormatError(f"graph file: line {lineno}: edges must satisfy u < w")
        if g.has_edge(u, w):
            raise FormatError(f"graph file: line {lineno}: duplicate edge {u} {w}")
        g.add_edge(u, w)
        seen_edges += 1
    if seen_edges != n_edges:
        raise FormatError(f"graph file: header declared {n_edges} edges, found {seen_edges}")
    return g


def _read_labels(labels_fh: TextIO, n_vertices: int) -> dict[int, Label]:
    labels: dict[int, Label] = {}
    for lineno, line in _content_lines(labels_fh):
        fields = line.split("\t")
        if len(fields) != 2:
            raise FormatError(f"label file: line {lineno}: expected '<id>\\t<label>'")
        try:
            vid = int(fields[0])
        except ValueError:
            raise FormatError(f"label file: line {lineno}: non-integer id {fields[0]!r}") from None
        if not (0 <= vid < n_vertices):
            raise FormatError(f"label file: line {lineno}: id {vid} out of range")
        if vid in labels:
            raise FormatError(f"label file: line {lineno}: duplicate id {vid}")
        try:
            labels[vid] = parse_label(fields[1])
        except ValueError as exc:
            raise FormatError(f"label file: line {lineno}: {exc}") from None
    return labels
