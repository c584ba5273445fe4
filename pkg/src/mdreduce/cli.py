"""Command-line front end.

One executable with subcommands for generating matching instances, running
both reduction stages, solving small instances exactly, certifying the
construction properties, and synthesizing or replaying search strategies.
Exit codes: 0 all checks passed, 1 a verified property was violated (details
on stderr), 2 usage or input errors.  Output is deterministic: identical
arguments and seeds produce byte-identical files and reports.
"""
from __future__ import annotations

import argparse
import sys
from contextlib import nullcontext
from pathlib import Path
from typing import ContextManager, Optional, Sequence, TextIO

from .certify import (
    certify_no,
    certify_yes,
    no_fact_lines,
    verify_forced_set_lemma,
    verify_forced_vertex_lemma,
    verify_pair_resolvers,
    verify_twins_forced,
    yes_fact_lines,
)
from .graphio import read_graph, write_graph, write_labels
from .graphs import (
    CapacityError,
    CheckReport,
    ConstructionError,
    metric_dimension_tiny,
    validate_path_decomposition,
)
from .md import (
    build_md,
    md_stats,
    verify_distance_preservation,
    write_md_sidecar,
)
from .mrs import (
    build_mrs,
    solve_mrs,
    verify_fvs,
    verify_lemma_resolve,
    verify_mrs_distances,
    write_mrs_sidecar,
)
from .tdm import ThreeDMInstance, format_3dm, gen_3dm, parse_3dm, solve_3dm
from .width import (
    parse_strategy,
    strategy_to_decomposition,
    synth_strategy,
    verify_strategy,
    write_strategy,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

# default guards; exhaustive verification is quadratic-ish in the built
# graph, so refuse surprise inputs instead of hanging on them
DEFAULT_MAX_N = 3
DEFAULT_MAX_M = 6


def _read_instance(args: argparse.Namespace) -> ThreeDMInstance:
    with open(args.infile, encoding="utf-8") as fh:
        inst = parse_3dm(fh)
    max_n = getattr(args, "max_n", None)
    max_m = getattr(args, "max_m", None)
    if max_n is not None and inst.n > max_n:
        raise CapacityError(f"instance has n={inst.n}, guard --max-n is {max_n}")
    if max_m is not None and inst.m > max_m:
        raise CapacityError(f"instance has m={inst.m}, guard --max-m is {max_m}")
    return inst


def _open_out(path: str) -> ContextManager[TextIO]:
    if path == "-":
        return nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="\n")


class _Facts:
    """Accumulates fact lines and mirrors failures to stderr."""

    def __init__(self) -> None:
        self.lines: list[str] = []
        self.all_pass = True

    def report(self, name: str, report: CheckReport) -> None:
        print(report.summary())
        if report.ok:
            self._add(f"fact {name} pass {report.checks}")
        else:
            self._add(f"fact {name} fail {report.violations[0]}")

    def claim(self, name: str, ok: bool, tokens: str = "") -> None:
        status = "pass" if ok else "fail"
        suffix = f" {tokens}" if tokens else ""
        self._add(f"fact {name} {status}{suffix}")

    def absorb(self, fact_lines: list[str]) -> None:
        for line in fact_lines:
            self._add(line)

    def _add(self, line: str) -> None:
        self.lines.append(line)
        print(line)
        fields = line.split()
        if fields[2] != "pass":
            print(f"violation: {fields[1]}: {' '.join(fields[3:])}", file=sys.stderr)
            self.all_pass = False

    def flush(self, facts_path: Optional[str]) -> None:
        if facts_path:
            with _open_out(facts_path) as fh:
                for line in self.lines:
                    fh.write(line + "\n")

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.all_pass else EXIT_VIOLATION


# -- subcommand handlers -----------------------------------------------------

def _cmd_gen3dm(args: argparse.Namespace) -> int:
    inst = gen_3dm(args.n, args.m, args.seed, planted=args.planted)
    header = (f"# gen3dm n={args.n} m={args.m} seed={args.seed} "
              f"planted={int(args.planted)}\n")
    with _open_out(args.out) as out:
        out.write(header)
        out.write(format_3dm(inst))
    return EXIT_OK


def _cmd_solve3dm(args: argparse.Namespace) -> int:
    inst = _read_instance(args)
    cover = solve_3dm(inst)
    if cover is None:
        print("solvable no")
    else:
        print("solvable yes")
        print("cover " + " ".join(map(str, cover)))
    return EXIT_OK


def _cmd_reduce(args: argparse.Namespace) -> int:
    inst = _read_instance(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.stage == "mrs":
        mrs = build_mrs(inst)
        g = mrs.graph
        with open(out_dir / "mrs.sidecar", "w", encoding="utf-8") as fh:
            write_mrs_sidecar(mrs, fh)
        print(f"reduced n={mrs.n} m={mrs.m} M={mrs.M} "
              f"vertices={g.vertex_count} edges={g.edge_count}")
    else:
        md = build_md(inst)
        g = md.graph
        with open(out_dir / "md.sidecar", "w", encoding="utf-8") as fh:
            write_md_sidecar(md, fh)
        stats = md_stats(md)
        print(f"reduced n={stats['n']} m={stats['m']} k={stats['k']} "
              f"vertices={stats['vertices']} edges={stats['edges']} "
              f"gadgets={stats['gadgets']}")
    with open(out_dir / "graph.txt", "w", encoding="utf-8") as fh:
        write_graph(g, fh)
    with open(out_dir / "labels.tsv", "w", encoding="utf-8") as fh:
        write_labels(g, fh)
    return EXIT_OK


def _cmd_solve_mrs(args: argparse.Namespace) -> int:
    inst = _read_instance(args)
    mrs = build_mrs(inst, check=False)
    selection = solve_mrs(mrs)
    if selection is None:
        print("solvable no")
    else:
        print("solvable yes")
        print("selection " + " ".join(map(str, selection)))
    return EXIT_OK


def _cmd_solve_tiny(args: argparse.Namespace) -> int:
    with open(args.graph, encoding="utf-8") as fh:
        if args.labels:
            with open(args.labels, encoding="utf-8") as lfh:
                g = read_graph(fh, lfh)
        else:
            g = read_graph(fh)
    best = metric_dimension_tiny(g, args.max_k)
    if best is None:
        print("size none")
    else:
        print(f"size {len(best)}")
        print("set " + " ".join(map(str, best)))
    return EXIT_OK


def _cmd_certify(args: argparse.Namespace) -> int:
    inst = _read_instance(args)
    n, m = inst.n, inst.m
    k = 34 * n * m + 19 * n
    facts = _Facts()
    what = args.property

    if what == "lemma1":
        print(f"certify lemma1 n={n} m={m} M={40 * (n + 1)}")
        mrs = build_mrs(inst, check=False)
        facts.report("distance-identities", verify_mrs_distances(mrs, inst))
        facts.report("selector-pair-biconditional", verify_lemma_resolve(mrs, inst))
    elif what in ("forcedset", "forcedvertex"):
        print(f"certify {what} n={n} m={m} k={k}")
        md = build_md(inst, check=False)
        if what == "forcedset":
            facts.report("forced-set", verify_forced_set_lemma(md))
        else:
            facts.report("forced-vertex", verify_forced_vertex_lemma(md))
    elif what == "yes":
        print(f"certify yes n={n} m={m} k={k}")
        md = build_md(inst, check=False)
        cert = certify_yes(md, inst)
        facts.absorb(yes_fact_lines(cert))
    elif what == "no":
        print(f"certify no n={n} m={m} k={k}")
        md = build_md(inst, check=False)
        cert = certify_no(md, inst)
        facts.absorb(no_fact_lines(cert))
    else:
        print(f"certify all n={n} m={m} k={k}")
        mrs = build_mrs(inst, check=False)
        facts.report("distance-identities", verify_mrs_distances(mrs, inst))
        facts.report("selector-pair-biconditional", verify_lemma_resolve(mrs, inst))
        fvs = verify_fvs(mrs.graph, mrs.hub_ids())
        facts.claim("fvs-acyclic", fvs.acyclic,
                    f"components {fvs.components}" if fvs.acyclic else "cycle")
        md = build_md(inst, check=False)
        gadget_want = 34 * n * m + 18 * n
        facts.claim(
            "structure-audit",
            len(md.gadgets) == gadget_want and md.k == k,
            f"gadgets {len(md.gadgets)} k {md.k}",
        )
        facts.report("forced-set", verify_forced_set_lemma(md))
        facts.report("forced-vertex", verify_forced_vertex_lemma(md))
        facts.report("twins-forced", verify_twins_forced(md))
        facts.report("pair-resolvers", verify_pair_resolvers(md, inst))
        facts.report("distance-preservation", verify_distance_preservation(md, inst))
        cover = solve_3dm(inst)
        if cover is None:
            cert = certify_no(md, inst)
            facts.absorb(no_fact_lines(cert))
        else:
            cert = certify_yes(md, inst)
            facts.absorb(yes_fact_lines(cert))
        moves = synth_strategy(md)
        trace = verify_strategy(md.graph, moves)
        facts.claim("width-strategy", trace.ok and trace.max_searchers <= 25,
                    f"searchers {trace.max_searchers}")
        decomp = validate_path_decomposition(
            md.graph, strategy_to_decomposition(md.graph, moves))
        facts.claim("width-decomposition",
                    decomp.ok and decomp.width is not None and decomp.width <= 24,
                    f"width {decomp.width}" if decomp.ok else str(decomp.violation))

    print("result " + ("pass" if facts.all_pass else "fail"))
    facts.flush(args.facts)
    return facts.exit_code


def _cmd_width_synth(args: argparse.Namespace) -> int:
    inst = _read_instance(args)
    md = build_md(inst, check=False)
    moves = synth_strategy(md)
    trace = verify_strategy(md.graph, moves)
    with _open_out(args.out) as fh:
        write_strategy(moves, fh)
    print(f"searchers {trace.max_searchers}")
    print(f"moves {len(moves)}")
    if not trace.ok:
        print("violation: synthesized strategy failed verification", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_width_verify(args: argparse.Namespace) -> int:
    with open(args.graph, encoding="utf-8") as fh, \
            open(args.labels, encoding="utf-8") as lfh:
        g = read_graph(fh, lfh)
    with open(args.strategy, encoding="utf-8") as fh:
        moves = parse_strategy(fh)
    trace = verify_strategy(g, moves)
    print(f"searchers {trace.max_searchers}")
    print(f"monotone {'yes' if trace.monotone else 'no'}")
    print(f"cleared {'yes' if trace.all_cleared else 'no'}")
    print(f"smooth {'yes' if trace.smooth else 'no'}")
    ok = trace.ok
    if args.max_searchers is not None and trace.max_searchers > args.max_searchers:
        print(f"violation: {trace.max_searchers} searchers exceed "
              f"--max-searchers {args.max_searchers}", file=sys.stderr)
        ok = False
    if trace.ok:
        decomp = validate_path_decomposition(g, strategy_to_decomposition(g, moves))
        print(f"width {decomp.width if decomp.ok else 'invalid'}")
        ok = ok and decomp.ok
    if not ok:
        if not trace.ok:
            print("violation: strategy is not monotone, smooth, and complete",
                  file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    inst = _read_instance(args)
    md = build_md(inst, check=False)
    moves = synth_strategy(md)
    bags = strategy_to_decomposition(md.graph, moves)
    decomp = validate_path_decomposition(md.graph, bags)
    if not decomp.ok:
        print(f"violation: decomposition invalid: {decomp.violation}", file=sys.stderr)
        return EXIT_VIOLATION
    with _open_out(args.out) as fh:
        fh.write(f"# decomposition bags={len(bags)} width={decomp.width}\n")
        for bag in bags:
            fh.write("bag " + " ".join(map(str, sorted(bag))) + "\n")
    print(f"bags {len(bags)}")
    print(f"width {decomp.width}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdreduce",
        description="Build and verify the matching-to-metric-dimension reduction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen3dm", help="generate a matching instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--planted", action="store_true",
                   help="embed a perfect matching in the first n triples")
    p.add_argument("--out", default="-", help="output file (default stdout)")
    p.set_defaults(handler=_cmd_gen3dm)

    p = sub.add_parser("solve3dm", help="solve a matching instance exactly")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(handler=_cmd_solve3dm)

    def add_guards(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--max-n", dest="max_n", type=int, default=DEFAULT_MAX_N)
        sp.add_argument("--max-m", dest="max_m", type=int, default=DEFAULT_MAX_M)

    p = sub.add_parser("reduce", help="run a reduction stage")
    p.add_argument("stage", choices=("mrs", "md"))
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="output directory")
    add_guards(p)
    p.set_defaults(handler=_cmd_reduce)

    p = sub.add_parser("solve", help="solve a reduced instance exactly")
    solve_sub = p.add_subparsers(dest="target", required=True)
    q = solve_sub.add_parser("mrs", help="one selector per class, exhaustively")
    q.add_argument("--in", dest="infile", required=True)
    q.set_defaults(handler=_cmd_solve_mrs)
    q = solve_sub.add_parser("tiny", help="exact metric dimension, at most 16 vertices")
    q.add_argument("--graph", required=True)
    q.add_argument("--labels", default=None)
    q.add_argument("--max-k", dest="max_k", type=int, required=True)
    q.set_defaults(handler=_cmd_solve_tiny)

    p = sub.add_parser("certify", help="verify construction properties")
    p.add_argument("property",
                   choices=("lemma1", "forcedset", "forcedvertex", "yes", "no", "all"))
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--facts", default=None, help="also write machine-readable fact lines here")
    add_guards(p)
    p.set_defaults(handler=_cmd_certify)

    p = sub.add_parser("width", help="synthesize or replay search strategies")
    width_sub = p.add_subparsers(dest="action", required=True)
    q = width_sub.add_parser("synth", help="synthesize a strategy for a reduced instance")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--out", default="-", help="strategy file (default stdout)")
    add_guards(q)
    q.set_defaults(handler=_cmd_width_synth)
    q = width_sub.add_parser("verify", help="replay a strategy file")
    q.add_argument("--graph", required=True)
    q.add_argument("--labels", required=True)
    q.add_argument("--strategy", required=True)
    q.add_argument("--max-searchers", dest="max_searchers", type=int, default=None)
    q.set_defaults(handler=_cmd_width_verify)

    p = sub.add_parser("export", help="export derived artifacts")
    export_sub = p.add_subparsers(dest="artifact", required=True)
    q = export_sub.add_parser("decomposition",
                              help="path decomposition from the synthesized strategy")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--out", default="-", help="output file (default stdout)")
    add_guards(q)
    q.set_defaults(handler=_cmd_export)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConstructionError as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (CapacityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
