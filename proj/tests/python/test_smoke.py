import json
import pathlib

import pytest

import patentpipe as pp

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def test_metrics():
    assert pp.rouge("the cat sat", "the cat") == 0.8
    assert pp.bleu(["a conical valve seat"], ["a conical valve seat"]) == pytest.approx(100.0)
    r = pp.irr("Valve seat conical. Valve seat conical. Poppet spring guide. Poppet spring guide.")
    assert r["pair_sum"] == 2
    assert r["value"] == pytest.approx(6.0 / (2.0 + 1e-6))
    assert pp.split_sentences("One here. Two there.") == ["One here.", "Two there."]
    with pytest.raises(pp.Error):
        pp.irr("Only one sentence.")
    with pytest.raises(pp.Error):
        pp.bleu(["a"], [])


def test_generate_with_mock(tmp_path):
    r = pp.generate(FIXTURES / "draft.json", mock_playbook=FIXTURES / "playbook_2x2.json", out_dir=tmp_path / "run")
    assert r["status"] == "complete"
    assert r["calls"] == 22
    assert "[[DESCRIPTION]]" in r["text"]
    assert (tmp_path / "run" / "patent.json").exists()
    again = pp.generate(FIXTURES / "draft.json", mock_playbook=FIXTURES / "playbook_2x2.json")
    assert again["patent"] == r["patent"]

    partial = pp.generate(FIXTURES / "draft.json", mock_playbook=FIXTURES / "playbook_abort.json")
    assert partial["status"] == "partial"
    assert partial["patent"] is None
    assert partial["error_kind"] == "TransportError"

    with pytest.raises(pp.ConfigError):
        pp.generate(FIXTURES / "draft.json")


def test_score_dirs(tmp_path):
    refs = FIXTURES / "bench" / "refs"
    report = pp.score(refs, refs, t=[0.3], out_dir=tmp_path)
    assert [row["doc_id"] for row in report["rows"]] == ["doc1", "doc2", "doc3"]
    assert all(row["bleu"] == pytest.approx(100.0) for row in report["rows"])
    assert "irr_t03" in report["rows"][0]
    assert json.loads((tmp_path / "report.json").read_text())["rows"] == report["rows"]


def test_splits_and_dataset(tmp_path):
    assert pp.default_split_sizes(7) == (5, 1, 1)
    ids = [f"r{i}" for i in range(10)]
    a = pp.make_splits(ids, (6, 2, 2), 3)
    b = pp.make_splits(list(reversed(ids)), (6, 2, 2), 3)
    assert a == b
    assert len(a["train"]) == 6
    summary = pp.build_dataset(
        FIXTURES / "records", tmp_path / "ds", mock_playbook=FIXTURES / "playbook_dataset.json", jobs=2
    )
    assert summary["accepted"] == 7
    assert summary["rejected"] == 3


def test_prompts():
    names = pp.template_names()
    assert "title_writer" in names
    text = pp.render_prompt("title_writer", {"draft": "DRAFT BODY"})
    assert "DRAFT BODY" in text
    assert pp.extract_tag("<Result> Pass </Result>", "Result") == "Pass"
    with pytest.raises(pp.ParseError):
        pp.extract_tag("no tags", "Result")
