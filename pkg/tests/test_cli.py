"""End-to-end command-line runs: files, exit codes, determinism."""
import io

import pytest

from mdreduce.cli import main
from mdreduce.graphio import read_graph
from mdreduce.md import build_md, read_md_sidecar
from mdreduce.tdm import parse_3dm

PLANTED_13 = ["gen3dm", "--n", "1", "--m", "3", "--seed", "7", "--planted"]
NO_23 = "3dm 2 3\ntuple 1 1 1\ntuple 1 2 2\ntuple 2 1 2\n"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gen3dm_is_deterministic_and_parseable(tmp_path):
    a, b = tmp_path / "a.3dm", tmp_path / "b.3dm"
    assert main(PLANTED_13 + ["--out", str(a)]) == 0
    assert main(PLANTED_13 + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    inst = parse_3dm(io.StringIO(a.read_text()))
    assert inst.n == 1 and inst.m == 3
    other = tmp_path / "c.3dm"
    assert main(["gen3dm", "--n", "2", "--m", "6", "--seed", "8", "--out", str(other)]) == 0
    assert other.read_bytes() != a.read_bytes()


def test_gen3dm_header_records_arguments(capsys):
    code, out, _ = run(capsys, *PLANTED_13)
    assert code == 0
    assert out.splitlines()[0] == "# gen3dm n=1 m=3 seed=7 planted=1"


def test_solve3dm_yes_and_no(capsys, tmp_path):
    inst = tmp_path / "inst.3dm"
    main(PLANTED_13 + ["--out", str(inst)])
    code, out, _ = run(capsys, "solve3dm", "--in", str(inst))
    assert code == 0
    assert "solvable yes" in out and "cover 1" in out

    no_file = tmp_path / "no.3dm"
    no_file.write_text(NO_23)
    code, out, _ = run(capsys, "solve3dm", "--in", str(no_file))
    assert code == 0 and "solvable no" in out


def test_reduce_md_round_trips(capsys, tmp_path):
    inst_file = tmp_path / "inst.3dm"
    main(PLANTED_13 + ["--out", str(inst_file)])
    out_dir = tmp_path / "red"
    code, out, _ = run(capsys, "reduce", "md", "--in", str(inst_file),
                       "--out", str(out_dir))
    assert code == 0
    assert "k=121" in out

    with open(out_dir / "graph.txt") as fh, open(out_dir / "labels.tsv") as lfh:
        loaded = read_graph(fh, lfh)
    with open(inst_file) as fh:
        fresh = build_md(parse_3dm(fh), check=False)
    assert loaded.vertex_count == fresh.graph.vertex_count
    assert list(loaded.edges()) == list(fresh.graph.edges())
    assert all(loaded.label(v) == fresh.graph.label(v) for v in loaded.vertices())

    with open(out_dir / "md.sidecar") as fh:
        again = read_md_sidecar(fh, loaded)
    assert again.k == fresh.k
    assert again.anchors == fresh.anchors
    assert again.gadgets == fresh.gadgets


def test_reduce_outputs_are_byte_identical(tmp_path):
    inst_file = tmp_path / "inst.3dm"
    main(PLANTED_13 + ["--out", str(inst_file)])
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["reduce", "mrs", "--in", str(inst_file), "--out", str(d1)]) == 0
    assert main(["reduce", "mrs", "--in", str(inst_file), "--out", str(d2)]) == 0
    for name in ("graph.txt", "labels.tsv", "mrs.sidecar"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_reduce_rejects_malformed_input(capsys, tmp_path):
    bad = tmp_path / "bad.3dm"
    bad.write_text("garbage\n")
    code, _, err = run(capsys, "reduce", "md", "--in", str(bad), "--out", str(tmp_path / "x"))
    assert code == 2
    assert "error:" in err


def test_certify_all_passes_on_planted_instance(capsys, tmp_path):
    inst_file = tmp_path / "inst.3dm"
    main(PLANTED_13 + ["--out", str(inst_file)])
    facts_file = tmp_path / "facts.txt"
    code, out, _ = run(capsys, "certify", "all", "--in", str(inst_file),
                       "--facts", str(facts_file))
    assert code == 0
    assert "k=121" in out
    assert out.rstrip().endswith("result pass")
    fact_lines = facts_file.read_text().splitlines()
    assert len(fact_lines) == 14
    assert all(line.split()[2] == "pass" for line in fact_lines)


def test_certify_lemma1(capsys, tmp_path):
    inst_file = tmp_path / "inst.3dm"
    main(["gen3dm", "--n", "1", "--m", "2", "--seed", "3", "--planted",
          "--out", str(inst_file)])
    code, out, _ = run(capsys, "certify", "lemma1", "--in", str(inst_file))
    assert code == 0
    assert "fact distance-identities pass" in out
    assert "fact selector-pair-biconditional pass" in out


def test_certify_yes_fails_on_unmatchable_instance(capsys, tmp_path):
    no_file = tmp_path / "no.3dm"
    no_file.write_text(NO_23)
    code, out, err = run(capsys, "certify", "yes", "--in", str(no_file))
    assert code == 1
    assert "fact matching fail" in out
    assert "violation:" in err


def test_certify_no_passes_on_unmatchable_instance(capsys, tmp_path):
    no_file = tmp_path / "no.3dm"
    no_file.write_text(NO_23)
    code, out, _ = run(capsys, "certify", "no", "--in", str(no_file))
    assert code == 0
    assert "fact no-cover pass" in out


def test_certify_no_is_refuted_on_solvable_instance(capsys, tmp_path):
    inst_file = tmp_path / "inst.3dm"
    main(PLANTED_13 + ["--out", str(inst_file)])
    code, out, _ = run(capsys, "certify", "no", "--in", str(inst_file))
    assert code == 1
    assert "fact no-cover fail 1" in out


def test_certify_guard_rejects_large_instances(capsys, tmp_path):
    big = tmp_path / "big.3dm"
    main(["gen3dm", "--n", "4", "--m", "7", "--seed", "1", "--out", str(big)])
    code, _, err = run(capsys, "certify", "all", "--in", str(big))
    assert code == 2
    assert "guard --max-n" in err


def test_width_synth_verify_pipeline(capsys, tmp_path):
    inst_file = tmp_path / "inst.3dm"
    main(PLANTED_13 + ["--out", str(inst_file)])
    out_dir = tmp_path / "red"
    main(["reduce", "md", "--in", str(inst_file), "--out", str(out_dir)])
    strat = tmp_path / "strat.txt"
    code, out, _ = run(capsys, "width", "synth", "--in", str(inst_file),
                       "--out", str(strat))
    assert code == 0 and "searchers 23" in out

    code, out, _ = run(capsys, "width", "verify",
                       "--graph", str(out_dir / "graph.txt"),
                       "--labels", str(out_dir / "labels.tsv"),
                       "--strategy", str(strat),
                       "--max-searchers", "25")
    assert code == 0
    assert "monotone yes" in out and "width 22" in out

    code, _, err = run(capsys, "width", "verify",
                       "--graph", str(out_dir / "graph.txt"),
                       "--labels", str(out_dir / "labels.tsv"),
                       "--strategy", str(strat),
                       "--max-searchers", "20")
    assert code == 1
    assert "exceed" in err


def test_width_verify_flags_recontamination(capsys, tmp_path):
    graph = tmp_path / "p3.txt"
    graph.write_text("g 3 2\ne 0 1\ne 1 2\n")
    labels = tmp_path / "p3.tsv"
    labels.write_text("0\tpv[v,0]\n1\tpv[v,1]\n2\tpv[v,2]\n")
    strat = tmp_path / "bad.strategy"
    strat.write_text("+ 0\n+ 1\n- 1\n- 0\n")
    code, out, _ = run(capsys, "width", "verify", "--graph", str(graph),
                       "--labels", str(labels), "--strategy", str(strat))
    assert code == 1
    assert "monotone no" in out


def test_solve_mrs(capsys, tmp_path):
    inst_file = tmp_path / "inst.3dm"
    main(PLANTED_13 + ["--out", str(inst_file)])
    code, out, _ = run(capsys, "solve", "mrs", "--in", str(inst_file))
    assert code == 0
    assert "solvable yes" in out and "selection 1" in out

    no_file = tmp_path / "no.3dm"
    no_file.write_text(NO_23)
    code, out, _ = run(capsys, "solve", "mrs", "--in", str(no_file))
    assert code == 0 and "solvable no" in out


def test_solve_tiny_with_and_without_labels(capsys, tmp_path):
    graph = tmp_path / "p3.txt"
    graph.write_text("g 3 2\ne 0 1\ne 1 2\n")
    code, out, _ = run(capsys, "solve", "tiny", "--graph", str(graph), "--max-k", "2")
    assert code == 0
    assert "size 1" in out and "set 0" in out

    code, out, _ = run(capsys, "solve", "tiny", "--graph", str(graph), "--max-k", "0")
    assert code == 0 and "size none" in out


def test_solve_tiny_rejects_large_graphs(capsys, tmp_path):
    graph = tmp_path / "big.txt"
    graph.write_text("g 17 0\n")
    code, _, err = run(capsys, "solve", "tiny", "--graph", str(graph), "--max-k", "1")
    assert code == 2
    assert "error:" in err


def test_export_decomposition(capsys, tmp_path):
    inst_file = tmp_path / "inst.3dm"
    main(PLANTED_13 + ["--out", str(inst_file)])
    out1, out2 = tmp_path / "d1.txt", tmp_path / "d2.txt"
    code, out, _ = run(capsys, "export", "decomposition", "--in", str(inst_file),
                       "--out", str(out1))
    assert code == 0 and "width 22" in out
    main(["export", "decomposition", "--in", str(inst_file), "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()
    first = out1.read_text().splitlines()[0]
    assert first.startswith("# decomposition bags=") and first.endswith("width=22")


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2
