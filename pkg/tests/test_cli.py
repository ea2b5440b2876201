import json

import pytest

from kbqa.cli import main
from kbqa.fixtures import fixture_dir
from kbqa.sparql import parse

ZH = fixture_dir("zh")
RES = ["--kb", str(ZH / "kb.tsv"), "--mentions", str(ZH / "mentions.tsv"), "--dicts", str(ZH / "dicts")]
QA = str(ZH / "qa.jsonl")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_load_then_ask_from_snapshot(tmp_path, capsys):
    snap = tmp_path / "snap"
    code, out, _ = run(capsys, "load", *RES, "--out", str(snap))
    assert code == 0 and json.loads(out)["triples"] == 58
    assert (snap / "kb.tsv").exists() and (snap / "dicts" / "gender.tsv").exists()
    code, out, _ = run(capsys, "ask", "--snapshot", str(snap), "-q", "王菲的经纪人是谁？")
    assert code == 0 and out.splitlines() == ["<陈家瑛>"]


def test_snapshot_round_trip_is_stable(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "load", *RES, "--out", str(a))
    run(capsys, "load", "--snapshot", str(a), "--out", str(b))
    assert (a / "kb.tsv").read_bytes() == (b / "kb.tsv").read_bytes()
    assert (a / "mentions.tsv").read_bytes() == (b / "mentions.tsv").read_bytes()


def test_ask_emit_sparql(capsys):
    code, out, _ = run(capsys, "ask", *RES, "-q", "周杰伦和蔡依林一起唱的是哪首歌？", "--emit-sparql")
    assert code == 0
    ast = parse(out.strip())
    assert ast.projected == "y" and len(ast.patterns) == 2


def test_ask_explain(capsys):
    code, out, _ = run(capsys, "ask", *RES, "-q", "成龙的儿子是谁？", "--explain")
    trace = json.loads(out)
    assert code == 0 and trace["rules"] == ["gender"] and trace["answers"] == ["<房祖名>"]


def test_ask_failure_exit_code(capsys):
    code, _, err = run(capsys, "ask", *RES, "-q", "今天天气怎么样？")
    assert code == 1 and "no-entity" in err


def test_missing_kb_is_an_error():
    with pytest.raises(SystemExit):
        main(["ask", "-q", "x"])


def test_eval_text_and_json(capsys):
    code, out, _ = run(capsys, "eval", *RES, "--qa", QA)
    assert code == 0 and "macro F1      1.0000" in out
    code, out, _ = run(capsys, "eval", *RES, "--qa", QA, "--json")
    report = json.loads(out)
    assert report["macro_f1"] == 1.0 and report["coverage"]["total"] == 20


def test_eval_ablate(capsys):
    code, out, _ = run(capsys, "eval", *RES, "--qa", QA, "--ablate")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 5
    assert lines[1].startswith("baseline ")


def test_convert(tmp_path, capsys):
    src = tmp_path / "train.txt"
    src.write_text("q1:王菲的经纪人是谁？\nselect ?x where { <王菲（歌手）> <经纪人> ?x. }\n<陈家瑛>\n",
                   encoding="utf-8")
    out_path = tmp_path / "train.jsonl"
    code, out, _ = run(capsys, "convert", "--ccks", str(src), "--out", str(out_path))
    assert code == 0 and "wrote 1" in out
    record = json.loads(out_path.read_text(encoding="utf-8"))
    assert record["answers"] == ["<陈家瑛>"]
    code, out, _ = run(capsys, "eval", *RES, "--qa", str(out_path))
    assert "macro F1      1.0000" in out


def test_export_pairs_reproducible(tmp_path, capsys):
    a, b, c = tmp_path / "a.tsv", tmp_path / "b.tsv", tmp_path / "c.tsv"
    for path, seed in ((a, "7"), (b, "7"), (c, "8")):
        code, _, _ = run(capsys, "export-pairs", *RES, "--qa", QA, "--out", str(path), "--seed", seed)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()
    labels = {line.split("\t")[0] for line in a.read_text(encoding="utf-8").splitlines()}
    assert labels == {"0", "1"}
