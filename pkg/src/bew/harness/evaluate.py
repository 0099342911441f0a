"""Dataset loading and the evaluation runner."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ..corpus import CorpusIndex
from ..scoring import EntityRef, MatchConfig, answer_detailed
from .metrics import exact_match_at_k, f1_at_k, sec_precision_at_k

log = logging.getLogger(__name__)

KS = (1, 2, 3)
QUADRANTS = ("CS-CA", "CS-WA", "WS-CA", "WS-WA")


@dataclass(frozen=True)
class GoldAnnotation:
    aggregator_id: str
    page: str
    section_title: str
    answers: tuple

    def to_json(self) -> dict:
        return {
            "aggregator": self.aggregator_id,
            "page": self.page,
            "section_title": self.section_title,
            "answers": list(self.answers),
        }


@dataclass(frozen=True)
class QaRecord:
    id: str
    entity: str
    question: str
    gold: tuple

    def __post_init__(self):
        if not any(g.answers for g in self.gold):
            raise ValueError(f"record {self.id!r} has no gold answer")

    @property
    def answers(self) -> list[str]:
        return [a for g in self.gold for a in g.answers]

    @property
    def section_titles(self) -> list[str]:
        return [g.section_title for g in self.gold]

    @classmethod
    def from_json(cls, data: dict) -> "QaRecord":
        gold = tuple(
            GoldAnnotation(g["aggregator"], g.get("page", ""), g["section_title"], tuple(g["answers"]))
            for g in data["gold"]
        )
        return cls(str(data["id"]), data["entity"], data["question"], gold)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "entity": self.entity,
            "question": self.question,
            "gold": [g.to_json() for g in self.gold],
        }


def load_dataset(path: str | Path) -> list[QaRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(QaRecord.from_json(json.loads(line)))
    return records


def save_dataset(records: Iterable[QaRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")


def _quadrant(correct_section: bool, correct_answer: bool) -> str:
    return ("CS" if correct_section else "WS") + "-" + ("CA" if correct_answer else "WA")


@dataclass
class EvalReport:
    em: dict = field(default_factory=dict)
    f1: dict = field(default_factory=dict)
    sec_p: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    quadrants: dict = field(default_factory=lambda: dict.fromkeys(QUADRANTS, 0))

    @property
    def n_questions(self) -> int:
        return len(self.rows)

    def quadrant_fractions(self) -> dict:
        total = sum(self.quadrants.values())
        return {q: (self.quadrants[q] / total if total else 0.0) for q in QUADRANTS}

    def to_json(self) -> dict:
        return {
            "n_questions": self.n_questions,
            "em": {str(k): v for k, v in self.em.items()},
            "f1": {str(k): v for k, v in self.f1.items()},
            "sec_p": {str(k): v for k, v in self.sec_p.items()},
            "quadrants": dict(self.quadrants),
            "quadrant_fractions": self.quadrant_fractions(),
            "config": self.config,
            "rows": self.rows,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def table(self, method: str = "pipeline") -> str:
        """Results laid out as ``Method  F1@1 F1@2 F1@3 EM@1 EM@2 EM@3``, plus sec-P@k."""
        head = ["Method"] + [f"F1@{k}" for k in KS] + [f"EM@{k}" for k in KS] + [f"sec-P@{k}" for k in KS]
        vals = [self.f1.get(k, 0.0) for k in KS] + [self.em.get(k, 0.0) for k in KS] + [self.sec_p.get(k, 0.0) for k in KS]
        width = max(len(method), len("Method"))
        lines = [
            "  ".join([head[0].ljust(width)] + [h.rjust(7) for h in head[1:]]),
            "  ".join([method.ljust(width)] + [f"{v:7.2f}" for v in vals]),
        ]
        return "\n".join(lines)


def _evaluate_one(record: QaRecord, corpus: CorpusIndex, cfg: MatchConfig, entities: Sequence[EntityRef]) -> dict:
    row = {"id": record.id, "question": record.question, "entity": record.entity, "error": None}
    known = {e.name.casefold(): e for e in entities}
    entity = known.get(record.entity.casefold(), EntityRef(record.entity))
    try:
        result = answer_detailed(record.question, entity, corpus, cfg, entities)
    except Exception as exc:  # a failing question must not abort the run
        log.warning("question %s failed: %s", record.id, exc)
        row.update(error=f"{type(exc).__name__}: {exc}", predictions=[], sections=[])
        for k in KS:
            row.update({f"em@{k}": 0, f"f1@{k}": 0.0, f"sec_p@{k}": 0})
        return row
    top = result.candidates[: max(KS)]
    predictions = [c.text for c in top]
    sections = [c.section.title for c in top]
    row.update(
        rewritten=result.rewritten,
        predictions=predictions,
        sections=sections,
        aggregators=[c.aggregator_id for c in top],
        scores=[round(c.ans_score, 12) for c in top],
    )
    for k in KS:
        row[f"em@{k}"] = exact_match_at_k(predictions, record.answers, k)
        row[f"f1@{k}"] = f1_at_k(predictions, record.answers, k)
        row[f"sec_p@{k}"] = sec_precision_at_k(sections, record.section_titles, k)
    return row


def run_eval(
    dataset: Sequence[QaRecord],
    corpus: CorpusIndex,
    cfg: MatchConfig,
    entities: Sequence[EntityRef] = (),
    workers: int = 1,
) -> EvalReport:
    """Answer every question and aggregate EM@k, F1@k, sec-P@k and quadrants.

    A question counts as answered when the pipeline returned at least one
    candidate; its answer is correct when F1@1 > 0 and its section is
    correct when sec-P@1 = 1.
    """
    entities = list(entities)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda r: _evaluate_one(r, corpus, cfg, entities), dataset))
    else:
        rows = [_evaluate_one(r, corpus, cfg, entities) for r in dataset]

    report = EvalReport(rows=rows, config=cfg.echo())
    n = len(rows)
    for k in KS:
        report.em[k] = sum(r[f"em@{k}"] for r in rows) / n if n else 0.0
        report.f1[k] = sum(r[f"f1@{k}"] for r in rows) / n if n else 0.0
        report.sec_p[k] = sum(r[f"sec_p@{k}"] for r in rows) / n if n else 0.0
    for r in rows:
        if r["error"] is None and r["predictions"]:
            report.quadrants[_quadrant(r["sec_p@1"] == 1, r["f1@1"] > 0)] += 1
    return report
