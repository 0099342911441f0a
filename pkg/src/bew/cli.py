"""Command line front end: ``bew mine-template|ask|eval|fetch|synth``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .corpus import FetchJob, fetch_entity_pages, load_corpus, sample_entity_ids
from .errors import BewError
from .harness.evaluate import load_dataset, run_eval
from .harness.synth import DEFAULT_TITLES, generate_synthetic_corpus
from .scoring import EntityRef, MatchConfig, answer, load_entities
from .semantic import LEXICAL, SEMANTIC, EmbedderSpec
from .template import DEFAULT_THETA, extract_template

ABLATE_CHOICES = ("none", "lexical-only", "semantic-only", "no-prior")


def _add_scoring_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--top-m", type=int, default=5)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--sample-n", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ablate", choices=ABLATE_CHOICES, default="none")
    p.add_argument("--agg-top-k", type=int, default=None, help="average only the best page scores")
    p.add_argument("--word-vectors", help="word-vector file for the semantic embedder")
    p.add_argument("--remote", metavar="URL", help="embedding service replacing the semantic embedder")
    p.add_argument("--remote-model", default="default")
    p.add_argument("--remote-dim", type=int, default=512, help="vector width returned by the service")


def _config(args) -> MatchConfig:
    semantic = SEMANTIC
    if args.word_vectors:
        semantic = EmbedderSpec("semantic", vocab_path=args.word_vectors, dimension=_vector_width(args.word_vectors))
    if args.remote:
        semantic = EmbedderSpec(f"remote:{args.remote_model}", dimension=args.remote_dim, endpoint=args.remote)
    return MatchConfig(
        sample_n=args.sample_n,
        top_k=args.k,
        top_m=args.top_m,
        seed=args.seed,
        ablation=args.ablate.replace("-", "_"),
        agg_top_k=args.agg_top_k,
        embedders=(semantic, LEXICAL),
    )


def _vector_width(path: str) -> int:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if len(parts) > 1:
                return len(parts) - 1
    raise SystemExit(f"{path}: no vectors found")


def cmd_mine_template(args) -> int:
    index = load_corpus(args.corpus)
    if args.aggregator not in index.aggregators:
        raise SystemExit(f"unknown aggregator {args.aggregator!r}")
    ids = sample_entity_ids(index, args.aggregator, args.pages, args.seed)
    pages = [index.page(args.aggregator, e) for e in ids]
    template = extract_template(pages, args.aggregator, args.theta)
    template.save(args.out)
    print(f"{args.aggregator}: {len(template.titles)} titles from {len(pages)} pages -> {args.out}")
    for t in template.titles:
        print(f"  {t.page_frequency:5.2f}  {t.text}")
    return 0


def _entities(path) -> list[EntityRef]:
    return load_entities(path) if path else []


def cmd_ask(args) -> int:
    index = load_corpus(args.corpus, args.templates)
    entities = _entities(args.entities)
    entity = next((e for e in entities if args.entity.casefold() in {n.casefold() for n in e.names}), None)
    entity = entity or EntityRef(args.entity)
    ranked = answer(args.question, entity, index, _config(args), entities)
    top = ranked[: args.limit]
    if args.json:
        print(json.dumps({"answers": [c.to_json() for c in top]}, indent=2, ensure_ascii=False))
    else:
        for i, c in enumerate(top, 1):
            print(f"{i:2d}. {c.ans_score:.4f}  {c.text}  [{c.section.title} @ {c.aggregator_id}]")
    return 0


def cmd_eval(args) -> int:
    index = load_corpus(args.corpus, args.templates)
    dataset = load_dataset(args.dataset)
    entities = _entities(args.entities)
    report = run_eval(dataset, index, _config(args), entities, workers=args.workers)
    if args.out:
        Path(args.out).write_text(report.dumps(), encoding="utf-8")
    print(report.table(args.method))
    errors = sum(1 for r in report.rows if r["error"])
    print(f"questions: {report.n_questions}  errors: {errors}  quadrants: {report.quadrants}")
    return 0


def cmd_fetch(args) -> int:
    data = json.loads(Path(args.jobs).read_text(encoding="utf-8"))
    jobs = [FetchJob.from_json(item) for item in data]
    snaps, errors = fetch_entity_pages(
        jobs, args.corpus, offline=args.offline or None, workers=args.workers, user_agent=args.user_agent
    )
    for snap in snaps:
        print(f"ok    {snap.aggregator_id}/{snap.entity_id}  {snap.source_url}")
    for err in errors:
        print(f"error {err.job.aggregator_id}/{err.job.entity_id}  {err.message}")
    return 1 if errors else 0


def cmd_synth(args) -> int:
    titles = [t.strip() for t in args.titles.split(",") if t.strip()]
    result = generate_synthetic_corpus(
        args.out, titles, args.aggregators, args.entities, args.dropout, args.seed, args.questions
    )
    print(f"wrote {len(result.aggregators)} aggregators x {args.entities} entities to {result.root}")
    print(f"dataset: {result.dataset_path} ({len(result.records)} questions)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bew", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine-template", help="mine a template from cached pages")
    p.add_argument("--corpus", required=True)
    p.add_argument("--aggregator", required=True)
    p.add_argument("--pages", type=int, default=100)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine_template)

    p = sub.add_parser("ask", help="answer one question")
    p.add_argument("--corpus", required=True)
    p.add_argument("--templates", required=True)
    p.add_argument("--entities")
    p.add_argument("--question", required=True)
    p.add_argument("--entity", required=True)
    p.add_argument("--limit", type=int, default=5)
    p.add_argument("--json", action="store_true")
    _add_scoring_args(p)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("eval", help="evaluate a dataset")
    p.add_argument("--corpus", required=True)
    p.add_argument("--templates", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--entities")
    p.add_argument("--out")
    p.add_argument("--method", default="pipeline")
    p.add_argument("--workers", type=int, default=1)
    _add_scoring_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fetch", help="fetch entity pages into the corpus")
    p.add_argument("--jobs", required=True)
    p.add_argument("--corpus", default=".")
    p.add_argument("--offline", action="store_true")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--user-agent", default="bew-fetch/0.1 (+offline-first snapshot cache)")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("synth", help="generate a synthetic corpus and dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--titles", default=",".join(DEFAULT_TITLES))
    p.add_argument("--entities", type=int, default=20)
    p.add_argument("--aggregators", type=int, default=3)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--questions", type=int, default=None)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except BewError as exc:
        print(f"bew: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
