import hashlib
import json
from pathlib import Path

import pytest

from bew.corpus import load_corpus
from bew.harness.evaluate import (
    QUADRANTS,
    EvalReport,
    GoldAnnotation,
    QaRecord,
    load_dataset,
    run_eval,
    save_dataset,
)
from bew.harness.synth import DEFAULT_TITLES, generate_synthetic_corpus
from bew.scoring import MatchConfig, load_entities


def tree_digest(root: Path) -> str:
    h = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        h.update(str(path.relative_to(root)).encode())
        h.update(path.read_bytes())
    return h.hexdigest()


def test_qa_record_roundtrip(tmp_path):
    rec = QaRecord("q1", "Altura", "Is there parking?",
                   (GoldAnnotation("ot", "altura", "Parking", ("Valet",)),))
    path = tmp_path / "d.jsonl"
    save_dataset([rec, rec], path)
    line = json.loads(path.read_text().splitlines()[0])
    assert list(line) == ["id", "entity", "question", "gold"]
    assert list(line["gold"][0]) == ["aggregator", "page", "section_title", "answers"]
    assert load_dataset(path) == [rec, rec]
    with pytest.raises(ValueError):
        QaRecord("q", "e", "?", (GoldAnnotation("a", "p", "T", ()),))


def test_empty_dataset(synth_corpus):
    report = run_eval([], load_corpus(synth_corpus.root), MatchConfig())
    assert report.n_questions == 0 and report.rows == []
    assert report.em == {1: 0.0, 2: 0.0, 3: 0.0}
    assert sum(report.quadrants.values()) == 0


def test_synthetic_fixture_scores(synth_corpus):
    corpus = load_corpus(synth_corpus.root)
    dataset = load_dataset(synth_corpus.dataset_path)
    report = run_eval(dataset, corpus, MatchConfig(), load_entities(synth_corpus.entities_path))
    assert report.n_questions == 20
    assert report.em[1] == 1.0 and report.sec_p[1] == 1.0
    for metric in (report.em, report.f1, report.sec_p):
        assert all(0.0 <= v <= 1.0 for v in metric.values())
        assert metric[1] <= metric[2] <= metric[3]
    fractions = report.quadrant_fractions()
    assert set(fractions) == set(QUADRANTS)
    assert sum(fractions.values()) == pytest.approx(1.0)


def test_failures_become_zero_rows(synth_corpus):
    corpus = load_corpus(synth_corpus.root)
    bad = QaRecord("x", "Nobody Anywhere", "Is there parking?", (GoldAnnotation("agg0", "", "Parking", ("lot",)),))
    good = load_dataset(synth_corpus.dataset_path)[0]
    report = run_eval([bad, good], corpus, MatchConfig())
    assert report.rows[0]["error"].startswith("NoEntityPages")
    assert report.rows[0]["em@1"] == 0 and report.rows[1]["error"] is None
    assert report.em[1] == 0.5
    assert sum(report.quadrants.values()) == 1


def test_parallel_matches_serial(synth_corpus):
    corpus = load_corpus(synth_corpus.root)
    dataset = load_dataset(synth_corpus.dataset_path)[:8]
    serial = run_eval(dataset, corpus, MatchConfig()).dumps()
    assert run_eval(dataset, corpus, MatchConfig(), workers=4).dumps() == serial


def test_quadrants_partition_answered():
    report = EvalReport(quadrants={"CS-CA": 3, "CS-WA": 1, "WS-CA": 0, "WS-WA": 4})
    assert report.quadrant_fractions() == {"CS-CA": 0.375, "CS-WA": 0.125, "WS-CA": 0.0, "WS-WA": 0.5}


def test_table_layout():
    report = EvalReport(em={1: 0.36, 2: 0.4, 3: 0.5}, f1={1: 0.63, 2: 0.7, 3: 0.75}, sec_p={1: 0.8, 2: 0.9, 3: 1.0})
    head, row = report.table("Bew").splitlines()
    assert head.split() == ["Method", "F1@1", "F1@2", "F1@3", "EM@1", "EM@2", "EM@3", "sec-P@1", "sec-P@2", "sec-P@3"]
    assert row.split() == ["Bew", "0.63", "0.70", "0.75", "0.36", "0.40", "0.50", "0.80", "0.90", "1.00"]


# -- generator


def test_same_seed_same_bytes(tmp_path):
    generate_synthetic_corpus(tmp_path / "a", seed=11, n_entities=6)
    generate_synthetic_corpus(tmp_path / "b", seed=11, n_entities=6)
    generate_synthetic_corpus(tmp_path / "c", seed=12, n_entities=6)
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")
    assert tree_digest(tmp_path / "a") != tree_digest(tmp_path / "c")


def test_zero_dropout_shows_every_title(tmp_path):
    result = generate_synthetic_corpus(tmp_path, n_entities=5, dropout=0.0, seed=2)
    index = load_corpus(tmp_path)
    for agg in result.aggregators:
        for entity in index.entity_ids(agg):
            html = index.snapshot(agg, entity).html.decode()
            assert all(t in html for t in DEFAULT_TITLES)


def test_generator_validation(tmp_path):
    with pytest.raises(ValueError):
        generate_synthetic_corpus(tmp_path, dropout=1.0)
    with pytest.raises(ValueError):
        generate_synthetic_corpus(tmp_path, titles=("A", "a"))


def test_gold_answers_appear_on_gold_pages(synth_corpus):
    index = load_corpus(synth_corpus.root)
    for rec in synth_corpus.records:
        for g in rec.gold:
            html = index.snapshot(g.aggregator_id, g.page).html.decode()
            assert all(a in html for a in g.answers) and g.section_title in html
