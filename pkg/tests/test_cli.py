import json
import subprocess
import sys

from bew.cli import main
from bew.harness.synth import PRIOR_ANSWER, PRIOR_DISTRACTOR, generate_prior_fixture


def test_synth_mine_ask_eval(tmp_path, capsys):
    root = tmp_path / "c"
    assert main(["synth", "--out", str(root), "--titles", "Parking,Cuisines,Hours of operation",
                 "--entities", "12", "--aggregators", "2", "--dropout", "0.1", "--seed", "3"]) == 0
    assert "12 entities" in capsys.readouterr().out
    for agg in ("agg0", "agg1"):
        assert main(["mine-template", "--corpus", str(root), "--aggregator", agg,
                     "--out", str(root / "templates" / f"{agg}.json")]) == 0
    tpl = json.loads((root / "templates" / "agg0.json").read_text())
    assert {t["text"] for t in tpl["titles"]} == {"Parking", "Cuisines", "Hours of operation"}
    capsys.readouterr()

    record = json.loads((root / "dataset.jsonl").read_text().splitlines()[0])
    args = ["ask", "--corpus", str(root), "--templates", str(root / "templates"),
            "--entities", str(root / "entities.json"), "--question", record["question"],
            "--entity", record["entity"], "--json", "--top-m", "2", "--k", "2", "--sample-n", "5"]
    assert main(args) == 0
    answers = json.loads(capsys.readouterr().out)["answers"]
    assert answers and set(answers[0]) == {"text", "score", "section", "aggregator"}
    assert answers[0]["text"] in record["gold"][0]["answers"]
    assert main(args[:-7]) == 0
    assert capsys.readouterr().out.startswith(" 1. ")

    out = tmp_path / "report.json"
    assert main(["eval", "--corpus", str(root), "--templates", str(root / "templates"),
                 "--dataset", str(root / "dataset.jsonl"), "--out", str(out), "--ablate", "lexical-only"]) == 0
    printed = capsys.readouterr().out
    assert printed.splitlines()[0].split()[:2] == ["Method", "F1@1"]
    report = json.loads(out.read_text())
    assert report["config"]["ablation"] == "lexical_only" and report["n_questions"] == 12


def test_errors_exit_cleanly(tmp_path, capsys):
    (tmp_path / "templates").mkdir()
    code = main(["ask", "--corpus", str(tmp_path), "--templates", str(tmp_path / "templates"),
                 "--question", "q", "--entity", "x"])
    assert code == 2 and "bew:" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    generate_prior_fixture(tmp_path)
    proc = subprocess.run([sys.executable, "-m", "bew", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "mine-template" in proc.stdout


def test_prior_fixture_flip(tmp_path, capsys):
    fx = generate_prior_fixture(tmp_path)
    (tmp_path / "templates").mkdir()
    base = ["--corpus", str(tmp_path), "--templates", str(tmp_path / "templates")]
    main(["mine-template", "--corpus", str(tmp_path), "--aggregator", "ptable",
          "--out", str(tmp_path / "templates" / "ptable.json")])
    capsys.readouterr()
    ask = ["ask", *base, "--entities", str(fx.entities_path), "--question", fx.records[0].question,
           "--entity", fx.records[0].entity, "--json"]
    main(ask)
    full = json.loads(capsys.readouterr().out)["answers"]
    main(ask + ["--ablate", "no-prior"])
    ablated = json.loads(capsys.readouterr().out)["answers"]
    assert full[0]["text"] == PRIOR_ANSWER
    assert ablated[0]["text"] == PRIOR_DISTRACTOR
