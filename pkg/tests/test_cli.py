import json

import pytest

from tripletag.cli import main
from tripletag.corpus import write_jsonl
from tripletag.synthetic import generate


@pytest.fixture
def example_file(tmp_path, example_tokens):
    path = tmp_path / "example.jsonl"
    path.write_text(json.dumps({
        "tokens": example_tokens,
        "triplets": [
            {"target": [0, 0], "opinion": [2, 3], "sentiment": "NEU"},
            {"target": [9, 10], "opinion": [5, 5], "sentiment": "POS"},
        ],
    }) + "\n")
    return path


def test_encode_prints_tags(example_file, capsys):
    assert main(["encode", str(example_file), "--scheme", "t", "--max-offset", "6"]) == 0
    assert capsys.readouterr().out.strip() == "S^0_{2,3} O O O O O O O O B^+_{-4,-4} E"


def test_decode_roundtrip(tmp_path, capsys):
    tags = tmp_path / "tags.txt"
    tags.write_text("O O B^0_{-2,-2} E O S^+_{4,5} O O O O O\n")
    assert main(["decode", str(tags), "--scheme", "o"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert {"target": [0, 0], "opinion": [2, 3], "sentiment": "NEU"} in out["triplets"]


def test_eval_identity(example_file, capsys):
    assert main(["eval", str(example_file), str(example_file), "--mode", "exact"]) == 0
    out = capsys.readouterr().out
    assert "f1=1.000000" in out and "1.000" in out


def test_eval_breakdown_csv(example_file, tmp_path, capsys):
    csv = tmp_path / "b.csv"
    assert main(["eval", str(example_file), str(example_file), "--by-length", "offset_len", "--csv", str(csv)]) == 0
    rows = csv.read_text().splitlines()
    assert rows[0].startswith("facet,length") and any(r.startswith("offset_len,4,") for r in rows)


def test_exit_codes(tmp_path, example_file):
    assert main(["stats", str(tmp_path / "missing.jsonl")]) == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"tokens": ["a"], "triplets": [{"target": [1, 0], "opinion": [0, 0], "sentiment": "POS"}]}\n')
    assert main(["stats", str(bad)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["encode", str(example_file), "--max-offset", "many"])
    assert exc.value.code == 1
    assert main(["encode", str(example_file), "--max-offset", "2"]) == 2


def test_train_predict_merge(tmp_path, capsys):
    write_jsonl(generate(10, seed=1), tmp_path / "train.jsonl")
    write_jsonl(generate(5, seed=2), tmp_path / "dev.jsonl")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epochs": 2, "hidden": 6, "embed_dim": 6, "offset_dim": 3, "dropout": 0.0}))
    rc = main(["train", "--config", str(cfg), "--train", str(tmp_path / "train.jsonl"),
               "--dev", str(tmp_path / "dev.jsonl"), "--out", str(tmp_path / "ck"), "--max-offset", "3", "--seed", "1"])
    assert rc == 0
    manifest = json.loads((tmp_path / "ck" / "manifest.json").read_text())
    assert manifest["config"]["max_offset"] == 3 and manifest["config"]["seed"] == 1
    assert manifest["format_version"] == 1
    pred = tmp_path / "pred.jsonl"
    assert main(["predict", str(tmp_path / "ck"), str(tmp_path / "dev.jsonl"), "-o", str(pred)]) == 0
    assert main(["eval", str(tmp_path / "dev.jsonl"), str(pred)]) == 0
    merged = tmp_path / "m.jsonl"
    assert main(["merge", str(pred), str(tmp_path / "dev.jsonl"), "-o", str(merged)]) == 0
    assert len(merged.read_text().splitlines()) == 5


def test_selfcheck(capsys):
    assert main(["selfcheck"]) == 0
    assert "all suites passed" in capsys.readouterr().out
