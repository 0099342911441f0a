"""Section, page, aggregator and answer scoring.

The cascade, for a question ``q`` with entity mentions removed:

* ``sec_score``  self-weighted mean of phrase match scores, sum(m^2) / sum(m)
* ``page_score`` self-weighted mean of a page's top-k section scores
* ``agg_score``  mean page score over sampled pages of an aggregator
* ``section_prior`` mean section score of same-titled sections in the sample
* ``sec_final_score`` section score plus prior
* ``ans_score`` phrase match plus the final score of its section
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .corpus import CorpusIndex, sample_entity_ids
from .errors import NoEntityPages, NoTemplates
from .sectionize import PageSections, Phrase, Section
from .semantic import ABLATIONS, LEXICAL, SEMANTIC, EmbedderSpec, match
from .template import title_key


@dataclass(frozen=True)
class MatchConfig:
    """Scoring knobs.

    ``sample_n`` pages are sampled per aggregator, ``top_k`` sections feed
    each page score and answers come from the ``top_m`` aggregators.
    ``embedders`` is ``(semantic, lexical)``. ``matcher`` replaces the
    embedding match entirely when given. ``agg_top_k`` averages only the
    best page scores instead of all of them.
    """

    sample_n: int = 20
    top_k: int = 3
    top_m: int = 5
    theta: float = 0.5
    embedders: tuple = (SEMANTIC, LEXICAL)
    ablation: str = "none"
    weights: tuple = (0.5, 0.5)
    seed: int = 0
    agg_top_k: Optional[int] = None
    matcher: Optional[Callable[[str, str], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.sample_n < 1 or self.top_k < 1 or self.top_m < 1:
            raise ValueError("sample_n, top_k and top_m must all be >= 1")
        if self.ablation not in ABLATIONS:
            raise ValueError(f"ablation must be one of {ABLATIONS}, got {self.ablation!r}")
        if self.agg_top_k is not None and self.agg_top_k < 1:
            raise ValueError("agg_top_k must be >= 1")

    def match(self, q: str, t: str) -> float:
        if self.matcher is not None:
            return max(0.0, self.matcher(q, t))
        return match(q, t, self.embedders, self.ablation, self.weights)

    def echo(self) -> dict:
        return {
            "sample_n": self.sample_n,
            "top_k": self.top_k,
            "top_m": self.top_m,
            "theta": self.theta,
            "ablation": self.ablation,
            "weights": list(self.weights),
            "seed": self.seed,
            "agg_top_k": self.agg_top_k,
            "embedders": [_spec_echo(s) for s in self.embedders],
            "matcher": None if self.matcher is None else getattr(self.matcher, "__name__", "custom"),
        }


def _spec_echo(spec: EmbedderSpec) -> dict:
    return {"provider": spec.provider_id, "dimension": spec.dimension, "seed": spec.seed}


@dataclass(frozen=True)
class EntityRef:
    name: str
    aliases: tuple = ()

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("entity name is empty")

    @property
    def names(self) -> list[str]:
        return [self.name, *self.aliases]


def load_entities(path: str | Path) -> list[EntityRef]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [EntityRef(item["name"], tuple(item.get("aliases", ()))) for item in data]


@dataclass
class ScoredSection:
    section: Section
    sec_score: float
    prior: float
    final_score: float
    page: Optional[PageSections] = None


@dataclass
class AnswerCandidate:
    text: str
    section: Section
    page: PageSections
    ans_score: float
    sec_final: float = 0.0
    aggregator_id: Optional[str] = None
    order: tuple = ()

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "score": round(self.ans_score, 12),
            "section": self.section.title,
            "aggregator": self.aggregator_id,
        }


# ---------------------------------------------------------------- question rewriting


def _name_pattern(name: str) -> str:
    def word(part: str) -> str:
        return "".join("['’]" if ch in "'’" else re.escape(ch) for ch in part)

    return r"\s+".join(word(p) for p in name.split())


def deentity(question: str, entities: Sequence[EntityRef]) -> str:
    """Replace entity mentions by "it" (possessives by "its").

    Longest names win; matching is case-insensitive on token boundaries.
    """
    names = sorted({n for e in entities for n in e.names if n.strip()}, key=lambda n: (-len(n), n))
    if not names:
        return question
    pattern = re.compile(
        r"(?<!\w)(?:%s)(?P<pos>['’]s)?(?!\w)" % "|".join(_name_pattern(n) for n in names),
        re.IGNORECASE,
    )

    def repl(m: re.Match) -> str:
        word = "its" if m.group("pos") else "it"
        return word.capitalize() if m.start() == 0 else word

    return pattern.sub(repl, question)


# ---------------------------------------------------------------- arithmetic


def self_weighted_mean(values: Iterable[float]) -> float:
    """sum(v^2) / sum(v); zero when the values sum to zero."""
    values = list(values)
    total = sum(values)
    if total == 0:
        return 0.0
    return sum(v * v for v in values) / total


def sec_score(q: str, s: Section, cfg: MatchConfig) -> float:
    return self_weighted_mean(cfg.match(q, t) for t in s.scoring_texts())


def _top_k(values: Iterable[float], k: int) -> list[float]:
    return sorted(values, reverse=True)[:k]


def page_score(q: str, p: PageSections, cfg: MatchConfig, sec_scores: Sequence[float] | None = None) -> float:
    if sec_scores is None:
        sec_scores = [sec_score(q, s, cfg) for s in p.sections]
    return self_weighted_mean(_top_k(sec_scores, cfg.top_k))


def agg_score(q: str, pages: Sequence[PageSections], cfg: MatchConfig, page_scores: Sequence[float] | None = None) -> float:
    if page_scores is None:
        page_scores = [page_score(q, p, cfg) for p in pages]
    if not page_scores:
        return 0.0
    if cfg.agg_top_k is not None:
        page_scores = _top_k(page_scores, cfg.agg_top_k)
    return sum(page_scores) / len(page_scores)


def section_prior(q: str, title: str, sample_pages: Sequence[PageSections], cfg: MatchConfig) -> float:
    """Mean section score of the sample's sections titled ``title``."""
    key = title_key(title)
    scores = [
        sec_score(q, s, cfg)
        for p in sample_pages
        for s in p.sections
        if not s.is_untitled and title_key(s.title) == key
    ]
    return sum(scores) / len(scores) if scores else 0.0


def sec_final_score(sec: float, prior: float, cfg: MatchConfig) -> float:
    return sec if cfg.ablation == "no_prior" else sec + prior


def ans_score(q: str, candidate_text: str, sec_final: float, cfg: MatchConfig) -> float:
    return cfg.match(q, candidate_text) + sec_final


# ---------------------------------------------------------------- aggregator ranking


@dataclass
class AggregatorSample:
    """Sampled, sectionized pages of one aggregator and their scores."""

    aggregator_id: str
    pages: list
    section_scores: list
    score: float

    def prior(self, title: str) -> float:
        key = title_key(title)
        scores = [
            score
            for page, per_section in zip(self.pages, self.section_scores)
            for section, score in zip(page.sections, per_section)
            if not section.is_untitled and title_key(section.title) == key
        ]
        return sum(scores) / len(scores) if scores else 0.0


def score_aggregator(
    q: str, corpus: CorpusIndex, aggregator_id: str, cfg: MatchConfig, exclude_entity: str | None = None
) -> AggregatorSample:
    entity_ids = sample_entity_ids(corpus, aggregator_id, cfg.sample_n, cfg.seed, exclude_entity)
    pages = [corpus.sections(aggregator_id, e) for e in entity_ids]
    section_scores = [[sec_score(q, s, cfg) for s in p.sections] for p in pages]
    page_scores = [page_score(q, p, cfg, scores) for p, scores in zip(pages, section_scores)]
    return AggregatorSample(aggregator_id, pages, section_scores, agg_score(q, pages, cfg, page_scores))


def _sample_all(q, corpus, cfg, exclude_names=()) -> list[AggregatorSample]:
    usable = corpus.usable_aggregators()
    if not usable:
        raise NoTemplates("no aggregator has both a template and cached pages")
    samples = []
    for agg in usable:
        exclude = corpus.find_entity(agg, exclude_names) if exclude_names else None
        sample = score_aggregator(q, corpus, agg, cfg, exclude)
        if sample.pages:
            samples.append(sample)
    if not samples:
        raise NoTemplates("no aggregator has sample pages left after exclusion")
    samples.sort(key=lambda s: (-s.score, s.aggregator_id))
    return samples


def rank_aggregators(
    q_agnostic: str, corpus: CorpusIndex, cfg: MatchConfig, exclude_entity: EntityRef | None = None
) -> list[tuple[str, float]]:
    """Aggregators by descending score, ties broken by aggregator id."""
    names = exclude_entity.names if exclude_entity is not None else ()
    return [(s.aggregator_id, s.score) for s in _sample_all(q_agnostic, corpus, cfg, names)]


# ---------------------------------------------------------------- answering


@dataclass
class AnswerResult:
    question: str
    rewritten: str
    ranking: list
    sections: list
    candidates: list


def answer_detailed(
    question: str,
    entity: EntityRef,
    corpus: CorpusIndex,
    cfg: MatchConfig,
    entities: Sequence[EntityRef] = (),
) -> AnswerResult:
    q = deentity(question, [entity, *entities])
    samples = _sample_all(q, corpus, cfg, entity.names)
    ranking = [(s.aggregator_id, s.score) for s in samples]

    scored: list[ScoredSection] = []
    candidates: list[AnswerCandidate] = []
    for rank, sample in enumerate(samples[: cfg.top_m]):
        entity_id = corpus.find_entity(sample.aggregator_id, entity.names)
        if entity_id is None:
            continue
        page = corpus.sections(sample.aggregator_id, entity_id)
        for s_idx, section in enumerate(page.sections):
            direct = sec_score(q, section, cfg)
            prior = 0.0 if section.is_untitled else sample.prior(section.title)
            if cfg.ablation == "no_prior":
                prior = 0.0
            final = sec_final_score(direct, prior, cfg)
            scored.append(ScoredSection(section, direct, prior, final, page))
            phrases = section.body or [Phrase(t, section.boundary_path) for t in section.structured]
            for p_idx, phrase in enumerate(phrases):
                candidates.append(
                    AnswerCandidate(
                        text=phrase.text,
                        section=section,
                        page=page,
                        ans_score=ans_score(q, phrase.text, final, cfg),
                        sec_final=final,
                        aggregator_id=sample.aggregator_id,
                        order=(rank, s_idx, p_idx),
                    )
                )
    if not scored:
        top = [s.aggregator_id for s in samples[: cfg.top_m]]
        raise NoEntityPages(f"no page for {entity.name!r} in top aggregators {top}")
    candidates.sort(key=lambda c: (-c.ans_score, -c.sec_final, c.order))
    scored.sort(key=lambda s: -s.final_score)
    return AnswerResult(question, q, ranking, scored, candidates)


def answer(
    question: str,
    entity: EntityRef,
    corpus: CorpusIndex,
    cfg: MatchConfig,
    entities: Sequence[EntityRef] = (),
) -> list[AnswerCandidate]:
    """Ranked answer candidates for ``question`` about ``entity``.

    Aggregators are ranked on pages of other entities; the entity's own
    pages from the ``top_m`` of them supply the candidates.
    """
    return answer_detailed(question, entity, corpus, cfg, entities).candidates
