"""Synthetic aggregator corpora with known templates and gold answers.

Pages instantiate a fixed list of section titles per aggregator with
randomized entity facts, per-page section dropout and boilerplate noise
(navigation, cookie banners, ads, footers). Because the generating titles
and injected facts are known, the corpus doubles as an oracle for template
mining and for end-to-end answering.
"""
from __future__ import annotations

import html
import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from ..corpus import META_FILE, PAGE_FILE, slugify
from .evaluate import GoldAnnotation, QaRecord, save_dataset

FETCHED_AT = datetime(2020, 6, 1, tzinfo=timezone.utc)

DEFAULT_TITLES = (
    "Hours of operation",
    "Cuisines",
    "Parking",
    "Dining Style",
    "Payment options",
    "Entertainment",
    "Amenities",
    "Phone number",
)

# title -> [(answer phrase, question template or None)]
FACT_POOLS: dict[str, list[tuple[str, Optional[str]]]] = {
    "Hours of operation": [
        ("Open daily from 11am to 10pm", "Is {e} open daily?"),
        ("Closed on Mondays", "Is {e} closed on Mondays?"),
        ("Late night service until 2am", "Does {e} offer late night service?"),
        ("Weekend brunch from 9am", "Does {e} serve weekend brunch?"),
        ("Happy hour 4pm to 6pm", "When is happy hour at {e}?"),
    ],
    "Cuisines": [
        ("Japanese sushi", "Does {e} serve Japanese sushi?"),
        ("Italian pasta", "Can I get Italian pasta at {e}?"),
        ("Mexican tacos", "Does {e} have Mexican tacos?"),
        ("Thai curry", "Is Thai curry on the menu at {e}?"),
        ("Vegan bowls", "Does {e} make vegan bowls?"),
    ],
    "Parking": [
        ("Valet parking", "Is there valet parking at {e}?"),
        ("Street parking", "Is there street parking near {e}?"),
        ("Garage parking nearby", "Is there a parking garage close to {e}?"),
        ("Bike racks", "Are there bike racks at {e}?"),
    ],
    "Dining Style": [
        ("Casual Elegant", "Is {e} casual elegant?"),
        ("Fine Dining", "Is {e} a fine dining place?"),
        ("Family style", "Does {e} serve family style?"),
        ("Counter service", "Is {e} counter service?"),
    ],
    "Payment options": [
        ("Visa and Mastercard", "Does {e} take Visa and Mastercard?"),
        ("Cash only", "Is {e} cash only?"),
        ("Apple Pay accepted", "Can I pay with Apple Pay at {e}?"),
        ("Gift cards", "Does {e} sell gift cards?"),
    ],
    "Entertainment": [
        ("Live music on Fridays", "Does {e} have live music?"),
        ("Karaoke night", "Is there karaoke night at {e}?"),
        ("Trivia on Tuesdays", "Does {e} host trivia?"),
        ("Jazz DJ on weekends", "Is there a jazz DJ at {e}?"),
    ],
    "Amenities": [
        ("Wheelchair accessible", "Is {e} wheelchair accessible?"),
        ("Outdoor patio seating", "Does {e} have outdoor patio seating?"),
        ("Free WiFi", "Does {e} have free WiFi?"),
        ("Private dining room", "Does {e} have a private dining room?"),
    ],
}
_GENERIC_ADJECTIVES = (
    "Deluxe", "Seasonal", "Express", "Premium", "Complimentary", "Rooftop", "Heated", "Midnight",
)
_NAME_HEADS = (
    "Altura", "Jodoku", "Bellwether", "Marigold", "Quillon", "Tavira", "Ostrander", "Vantor",
    "Zephyra", "Calloway", "Brisa", "Nakamori", "Lindqvist", "Oberon", "Pemberly", "Ruskin",
    "Sorrento", "Thistle", "Umbria", "Wexley", "Yarrow", "Corvina", "Delacroix", "Fennimore",
)
_NAME_TAILS = ("Bistro", "Kitchen", "Tavern", "Grill", "Eatery", "Cantina", "Brasserie", "Diner")
_STREETS = ("Main St", "Elm Ave", "Harbor Blvd", "Pine St", "Lakeview Dr", "Market St")
_CITIES = ("Bellevue, WA", "Oakland, CA", "Austin, TX", "Denver, CO", "Portland, OR")
_REVIEW_BITS = (
    "Loved the", "Great", "Slightly noisy but the", "Friendly staff and the", "Would return for the",
)
_REVIEW_ITEMS = ("ambience", "dessert menu", "window seats", "lemon tart", "service", "cocktails")
_PROMOS = ("Sponsored: 20% off delivery", "Advertisement", "Book now and earn points")


def facts_for(title: str) -> list[tuple[str, Optional[str]]]:
    if title in FACT_POOLS:
        return FACT_POOLS[title]
    if title.casefold() == "phone number":
        return []
    noun = title.split()[-1].lower()
    return [(f"{adj} {noun}", f"Is there {adj.lower()} {noun} at {{e}}?") for adj in _GENERIC_ADJECTIVES]


@dataclass
class SyntheticCorpus:
    root: Path
    dataset_path: Path
    entities_path: Path
    titles: tuple
    aggregators: list
    records: list = field(default_factory=list)


def _entity_names(rng: random.Random, n: int) -> list[str]:
    combos = [f"{h} {t}" for h in _NAME_HEADS for t in _NAME_TAILS]
    rng.shuffle(combos)
    if n > len(combos):
        combos += [f"{c} {i}" for i in range(1, n // len(combos) + 2) for c in list(combos)]
    return combos[:n]


def _section_html(style: int, title: str, facts: Sequence[str], itemprop: bool) -> str:
    t = html.escape(title)
    prop = ' itemprop="servesCuisine"' if itemprop else ""
    if style == 0:
        items = "".join(f"<li{prop}>{html.escape(f)}</li>" for f in facts)
        return f'<div class="section"><h2 class="section-title">{t}</h2><ul>{items}</ul></div>'
    if style == 1:
        items = "".join(f"<div><span{prop}>{html.escape(f)}</span></div>" for f in facts)
        return (
            '<div class="block">'
            f'<div style="font-size:20px;font-weight:bold">{t}</div>'
            f'<div class="values">{items}</div></div>'
        )
    items = "".join(f"<p{prop}>{html.escape(f)}</p>" for f in facts)
    return f'<section class="panel"><p class="hdr">{t}</p>{items}</section>'


_STYLESHEET = (
    "body { font-size: 16px; } .hdr { font-size: 18px; font-weight: 700; } "
    ".muted { color: #777; } .promo-box { font-size: 22px; font-weight: bold; }"
)


def render_page(
    rng: random.Random,
    style: int,
    aggregator: str,
    name: str,
    sections: Sequence[tuple[str, Sequence[str]]],
    phone: str,
    address: str,
) -> str:
    body = []
    for title, facts in sections:
        body.append(_section_html(style, title, facts, itemprop=title == "Cuisines"))
        if rng.random() < 0.3:
            body.append(
                f'<div class="ad-banner"><strong style="font-size:22px">{html.escape(rng.choice(_PROMOS))}</strong></div>'
            )
    review = f"{rng.choice(_REVIEW_BITS)} {rng.choice(_REVIEW_ITEMS)}. Rated {rng.randint(30, 50) / 10} stars."
    jsonld = json.dumps(
        {
            "@context": "https://schema.org",
            "@type": "Restaurant",
            "name": name,
            "telephone": phone,
            "address": {"@type": "PostalAddress", "streetAddress": address},
        }
    )
    return "\n".join(
        [
            "<!DOCTYPE html>",
            '<html><head><meta charset="utf-8">',
            f"<title>{html.escape(name)} | {aggregator}</title>",
            f"<style>{_STYLESHEET}</style>",
            f'<script type="application/ld+json">{jsonld}</script>',
            "<script>window.dataLayer = [];</script>",
            "</head><body>",
            '<div id="top-nav"><a href="/">Home</a> <a href="/r">Restaurants</a>'
            ' <b style="font-size:18px">Sign in</b></div>',
            '<div class="cookie-notice" style="font-size:20px;font-weight:bold">We use cookies</div>',
            '<div class="main">',
            f"<h1>{html.escape(name)}</h1>",
            f'<div class="summary"><span>{html.escape(address)}</span></div>',
            f'<div class="content">{"".join(body)}</div>',
            f'<div class="reviews"><p class="muted">{html.escape(review)}</p></div>',
            "</div>",
            f'<div class="promo-box">{html.escape(rng.choice(_PROMOS))}</div>',
            '<div style="display:none"><b style="font-size:30px">Hidden upsell</b></div>',
            f"<footer><p>&copy; 2020 {html.escape(aggregator)}. All rights reserved.</p><p>Terms of use</p></footer>",
            "</body></html>",
        ]
    )


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def generate_synthetic_corpus(
    out: str | Path,
    titles: Sequence[str] = DEFAULT_TITLES,
    n_aggregators: int = 3,
    n_entities: int = 20,
    dropout: float = 0.2,
    seed: int = 7,
    n_questions: int | None = None,
) -> SyntheticCorpus:
    """Write ``corpus/``, ``dataset.jsonl`` and ``entities.json`` under ``out``.

    Every aggregator lists every entity. Each section is dropped from a page
    with probability ``dropout``. Questions default to one per entity (cycling
    when more are requested), each targeting a fact that is shown on at
    least one aggregator page.
    """
    if not 0 <= dropout < 1:
        raise ValueError("dropout must be in [0, 1)")
    titles = tuple(titles)
    if len(titles) < 1 or len({t.casefold() for t in titles}) != len(titles):
        raise ValueError("titles must be non-empty and distinct")
    out = Path(out)
    rng = random.Random(seed)
    names = _entity_names(rng, n_entities)
    aggregators = [f"agg{i}" for i in range(n_aggregators)]
    layouts = {}
    for i, agg in enumerate(aggregators):
        order = list(titles)
        rng.shuffle(order)
        layouts[agg] = (i % 3, order)

    truth = {}
    for name in names:
        facts = {}
        for title in titles:
            pool = facts_for(title)
            if pool:
                facts[title] = rng.sample(pool, k=min(len(pool), rng.choice((1, 2))))
        phone = f"({rng.randint(200, 989)}) 555-{rng.randint(0, 9999):04d}"
        address = f"{rng.randint(10, 9999)} {rng.choice(_STREETS)}, {rng.choice(_CITIES)}"
        truth[name] = (facts, phone, address)

    shown: dict[tuple[str, str], set] = {}
    for agg in aggregators:
        style, order = layouts[agg]
        for name in names:
            facts, phone, address = truth[name]
            sections = []
            for title in order:
                if rng.random() < dropout:
                    continue
                values = [f for f, _ in facts[title]] if title in facts else [phone]
                sections.append((title, values))
                shown.setdefault((agg, name), set()).add(title)
            slug = slugify(name)
            directory = out / "corpus" / agg / slug
            _write(directory / PAGE_FILE, render_page(rng, style, agg, name, sections, phone, address))
            meta = {
                "aggregator": agg,
                "entity": slug,
                "url": f"https://{agg}.example/r/{slug}",
                "fetched_at": FETCHED_AT.isoformat(),
            }
            _write(directory / META_FILE, json.dumps(meta, indent=2) + "\n")

    records = []
    total = n_entities if n_questions is None else n_questions
    for qi in range(total):
        name = names[qi % len(names)]
        facts = truth[name][0]
        options = [
            (title, fact, question)
            for title in titles
            for fact, question in facts.get(title, [])
            if question and any(title in shown.get((a, name), ()) for a in aggregators)
        ]
        if not options:
            continue
        title, fact, question = rng.choice(options)
        gold = tuple(
            GoldAnnotation(agg, slugify(name), title, (fact,))
            for agg in aggregators
            if title in shown.get((agg, name), ())
        )
        records.append(QaRecord(f"q{qi:04d}", name, question.format(e=name), gold))

    dataset_path = out / "dataset.jsonl"
    entities_path = out / "entities.json"
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(records, dataset_path)
    _write(entities_path, json.dumps([{"name": n, "aliases": []} for n in names], indent=2) + "\n")
    return SyntheticCorpus(out, dataset_path, entities_path, titles, aggregators, records)


PRIOR_AGGREGATOR = "ptable"
PRIOR_ENTITY = "Altura"
PRIOR_QUESTION = "Is there a dress code at Altura?"
PRIOR_ANSWER = "Casual Elegant"
PRIOR_DISTRACTOR = "Dress shop coupon code at checkout"


def generate_prior_fixture(out: str | Path, n_samples: int = 12, seed: int = 3) -> SyntheticCorpus:
    """A corpus where only the section prior can rescue the right answer.

    The target page answers the dress-code question in a short "Dress code"
    section whose value shares no words with the question, while a long
    "Highlights" section holds a lexically similar distractor. Sample pages
    of other entities show dress-code wording under "Dress code" and only
    unrelated items under "Highlights".
    """
    out = Path(out)
    rng = random.Random(seed)
    codes = ["Jacket required, dress code enforced", "Formal dress code", "Smart casual dress code", "Dress code: business attire"]
    highlights = [
        "Chef tasting menu", "Rooftop view", "Seasonal cocktails", "Award winning wine list",
        "Open kitchen", "Local farm produce", "Handmade pasta", "Sunset terrace",
    ]
    names = [f"{h} {t}" for h, t in zip(_NAME_HEADS[1:], _NAME_TAILS * 3)][:n_samples]
    pages = {
        name: [("Dress code", [rng.choice(codes)]), ("Highlights", rng.sample(highlights, 4)),
               ("Hours of operation", ["Open daily from 5pm"])]
        for name in names
    }
    pages[PRIOR_ENTITY] = [
        ("Dress code", [PRIOR_ANSWER]),
        ("Highlights", [PRIOR_DISTRACTOR] + rng.sample(highlights, 5)),
        ("Hours of operation", ["Open daily from 5pm"]),
    ]
    for name, sections in pages.items():
        slug = slugify(name)
        directory = out / "corpus" / PRIOR_AGGREGATOR / slug
        _write(directory / PAGE_FILE, render_page(rng, 0, PRIOR_AGGREGATOR, name, sections, "(206) 555-0100", "1 Main St"))
        meta = {"aggregator": PRIOR_AGGREGATOR, "entity": slug,
                "url": f"https://{PRIOR_AGGREGATOR}.example/r/{slug}", "fetched_at": FETCHED_AT.isoformat()}
        _write(directory / META_FILE, json.dumps(meta, indent=2) + "\n")
    record = QaRecord(
        "prior-0", PRIOR_ENTITY, PRIOR_QUESTION,
        (GoldAnnotation(PRIOR_AGGREGATOR, slugify(PRIOR_ENTITY), "Dress code", (PRIOR_ANSWER,)),),
    )
    dataset_path = out / "dataset.jsonl"
    entities_path = out / "entities.json"
    save_dataset([record], dataset_path)
    _write(entities_path, json.dumps([{"name": n, "aliases": []} for n in pages], indent=2) + "\n")
    return SyntheticCorpus(out, dataset_path, entities_path, ("Dress code", "Highlights", "Hours of operation"),
                           [PRIOR_AGGREGATOR], [record])
