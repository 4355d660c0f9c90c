import io

import pytest

from examples import (EX3_ROOTS, example1, example1_stages, example2, example2_stages, example3,
                      sequential_pipeline, streamed_pipeline)
from kgtk.cli import main, registry
from kgtk.errors import BadStageArgs, EmptyStage, UnknownSubcommand
from kgtk.pipeline import parse_pipeline, split_stages

REG = registry()


def test_split_stages():
    assert split_stages(["a", "x", "/", "b"]) == [["a", "x"], ["b"]]
    with pytest.raises(EmptyStage):
        split_stages(["a", "/", "/", "b"])
    with pytest.raises(EmptyStage):
        split_stages(["a", "/"])


def test_example1_plan(fixtures):
    argv = ["import-conceptnet", "--english_only", "conceptnet.csv", "/", "filter", "-p", "; /r/IsA ;",
            "/", "sort", "-c", "1,2,3"]
    plan = parse_pipeline(argv, REG)
    assert [s.name for s in plan.stages] == ["import-conceptnet", "filter", "sort"]
    assert plan.stages[0].args.input == "conceptnet.csv"


def test_example2_plan_binds_file_to_first_stage():
    argv = ["filter", "-p", " ; P463 ; ", "/", "clean_data", "/", "remove-columns", "-c", "id,rank", "wikidata.tsv"]
    plan = parse_pipeline(argv, REG)
    assert len(plan) == 3
    assert plan.stages[1].name == "clean"
    assert plan.stages[0].args.input == "wikidata.tsv"
    assert plan.stages[2].args.input is None


def test_single_stage_plan():
    plan = parse_pipeline(["validate", "-i", "f.tsv"], REG)
    assert len(plan) == 1 and plan.stages[0].args.input == "f.tsv"


@pytest.mark.parametrize("argv,exc", [
    (["nosuch"], UnknownSubcommand),
    (["filter", "-p", " ; P1 ; ", "/", "sort", "--bogus"], BadStageArgs),
    (["filter", "-p", "P1"], BadStageArgs),
    (["sort", "/", "import-conceptnet", "x.csv"], BadStageArgs),
    (["text-embeddings", "--label-properties", "l", "/", "sort"], BadStageArgs),
    (["filter", "-p", ";;", "-o", "x.tsv", "/", "sort"], BadStageArgs),
    (["filter", "-p", ";;", "a.tsv", "/", "sort", "b.tsv"], BadStageArgs),
])
def test_plan_errors(argv, exc):
    with pytest.raises(exc):
        parse_pipeline(argv, REG)


def test_bad_flag_refuses_to_start(cli, tmp_path):
    out = tmp_path / "never.tsv"
    res = cli(["filter", "-p", " ; P1 ; ", "-i", "/nonexistent.tsv", "/", "sort", "--bogus", "-o", str(out)])
    assert res.code == 1
    assert "stage 2" in res.err
    assert not out.exists()  # nothing ran, not even the missing input was opened


def test_exit_codes(cli, tmp_path):
    assert cli(["--version"]).code == 0
    assert cli([]).code == 1
    assert cli(["nosuch"]).code == 1
    assert cli(["validate", "-i", str(tmp_path / "missing.tsv")]).code == 3
    bad = tmp_path / "bad.tsv"
    bad.write_text("node1\tlabel\tnode2\nQ1\tP1\t@99/0\n")
    assert cli(["validate", "--on-error", "abort", str(bad)]).code == 2
    ok = cli(["validate", str(bad)])
    assert ok.code == 0 and "coordinates" in ok.err


def test_stdin_stdout(cli):
    res = cli(["filter", "-p", " ; P1 ; "], stdin=b"node1\tlabel\tnode2\nQ1\tP1\tQ2\nQ1\tP2\tQ3\n")
    assert res.code == 0
    assert res.text == "node1\tlabel\tnode2\nQ1\tP1\tQ2\n"


def test_stage_help(cli):
    res = cli(["sort", "-h"])
    assert res.code == 0 and "--mem" in res.err


def test_progress_diagnostics(cli, fixtures):
    res = cli(["--progress", "filter", "-p", " ; P463 ; ", str(fixtures / "wikidata_toy.tsv"), "/", "sort", "-c", "node2"])
    assert res.code == 0
    assert "stage 1 filter: rows in" in res.err and "stage 2 sort:" in res.err


def test_failure_in_a_later_stage_stops_the_pipeline(cli, fixtures):
    res = cli(["filter", "-p", " ; ; ", str(fixtures / "wikidata_toy.tsv"), "/", "validate", "--on-error", "abort"])
    assert res.code == 2
    assert "stage 2 (validate) failed" in res.err


def test_single_stage_equals_direct_call(cli, fixtures):
    f = str(fixtures / "wikidata_toy.tsv")
    assert cli(["sort", "-c", "node2", f]).out == cli(["sort", "-c", "node2", "-i", f]).out


def test_example1_streamed_equals_sequential(tmp_path):
    a = example1(tmp_path, streamed=True)
    b = example1(tmp_path, streamed=False)
    assert a == b
    lines = a[0].decode().splitlines()
    assert lines[0] == "node1\tlabel\tnode2\tid"
    assert all(l.split("\t")[1] in {"/r/Causes", "/r/UsedFor", "/r/Synonym", "/r/DefinedAs", "/r/IsA"}
               for l in lines[1:])
    assert [l.split("\t")[:3] for l in lines[1:]] == sorted(l.split("\t")[:3] for l in lines[1:])
    emb = a[1].decode().splitlines()
    assert emb and all(len(l.split("\t")[1].split()) == 64 for l in emb)


def test_example2_streamed_equals_sequential(tmp_path):
    a = example2(tmp_path, streamed=True)
    b = example2(tmp_path, streamed=False)
    assert a == b
    header = a[0].decode().splitlines()[0].split("\t")
    assert header == ["node1", "label", "node2"]
    assert b"vertex_pagerank" in a[1] and b"vertex_in_degree" in a[1]


def test_example3_streamed_equals_sequential(tmp_path):
    a = example3(tmp_path, streamed=True)
    b = example3(tmp_path, streamed=False)
    assert a == b
    reach = [l.split("\t") for l in a[1].decode().splitlines()[1:]]
    roots = set(EX3_ROOTS.split(","))
    assert reach and {r[0] for r in reach} <= roots and all(r[1] == "reachable" for r in reach)


def test_join_and_cat_read_upstream_plus_files(cli, tmp_path):
    left = tmp_path / "l.tsv"
    right = tmp_path / "r.tsv"
    left.write_text("node1\tlabel\tnode2\nb\tp\t2\na\tp\t1\n")
    right.write_text("node1\tlabel\tnode2\na\tq\t9\n")
    res = cli(["sort", "-c", "node1", str(left), "/", "join", "--join-type", "inner", str(right)])
    assert res.code == 0, res.err
    assert res.text == "node1\tlabel\tnode2\tright.label\tright.node2\na\tp\t1\tq\t9\n"
    res = cli(["cat", str(left), str(right)])
    assert res.text.count("\n") == 4


def test_broken_pipe_is_orderly(tmp_path, fixtures):
    class Closed(io.BytesIO):
        def write(self, b):
            raise BrokenPipeError()

    code = main(["sort", "-c", "node1", str(fixtures / "wikidata_toy.tsv")], stdout=Closed(), stderr=io.StringIO())
    assert code == 0


def test_export_property_graph_cli(cli, tmp_path, fixtures):
    n, e = tmp_path / "n.tsv", tmp_path / "e.tsv"
    res = cli(["export-property-graph", "--nodes-file", str(n), "--edges-file", str(e),
               str(fixtures / "saint_david.tsv")])
    assert res.code == 0, res.err
    assert "Q1\t'Saint David'@en" in n.read_text()


def test_ntriples_cli_round_trip(cli, tmp_path):
    nt = tmp_path / "a.nt"
    nt.write_text('<http://www.wikidata.org/entity/Q1> <http://www.w3.org/2000/01/rdf-schema#label> "x"@en .\n')
    kg = cli(["import-ntriples", str(nt)])
    assert kg.text.splitlines()[1] == "wd:Q1\trdfs:label\t'x'@en\t"
    back = cli(["export-ntriples"], stdin=kg.out)
    assert back.text == nt.read_text()


def test_broken_pipe_in_a_real_process(tmp_path):
    import subprocess
    import sys
    big = tmp_path / "big.tsv"
    big.write_text("node1\tlabel\tnode2\n" + "".join(f"Q{i}\tP{i % 3}\tQ{i % 97}\n" for i in range(200_000)))
    proc = subprocess.Popen([sys.executable, "-m", "kgtk", "filter", "-p", " ; P1 ; ", str(big), "/",
                             "sort", "-c", "node2"], stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    first = proc.stdout.readline()
    proc.stdout.close()
    err = proc.stderr.read()
    assert proc.wait(timeout=60) == 0, err
    assert first == b"node1\tlabel\tnode2\n"
    assert b"Traceback" not in err
