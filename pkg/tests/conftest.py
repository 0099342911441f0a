from __future__ import annotations

from datetime import datetime, timezone

import pytest

from bew.dom import PageSnapshot, parse_html, strip_boilerplate
from bew.harness.synth import generate_synthetic_corpus

SUSHI_HTML = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>Jodoku Sushi Rockridge</title></head>
<body>
<nav class="site-nav"><a href="/">OpenTable</a></nav>
<div class="restaurant">
  <h1>Jodoku Sushi Rockridge</h1>
  <div id="details">
    <div class="item"><span style="font-size:20px;font-weight:bold">Dining Style</span><span>Casual Dining</span></div>
    <div class="item"><span style="font-size:20px;font-weight:bold">Cuisines</span><span>Sushi, Japanese</span></div>
  </div>
  <div class="item"><span style="font-size:20px;font-weight:bold">Hours of operation</span><span>Dinner Mon-Sun 5:00 pm-10:00 pm</span></div>
  <div class="item"><span style="font-size:20px;font-weight:bold">Phone number</span><span>(510) 555-0199</span></div>
</div>
<footer>&copy; 2020 OpenTable</footer>
</body></html>
"""

OPENTABLE_VALUES = {
    "Dining Style": ["Casual Dining", "Casual Elegant", "Fine Dining"],
    "Cuisines": ["Sushi, Japanese", "Italian", "Steakhouse", "Thai"],
    "Hours of operation": ["Dinner Mon-Sun 5:00 pm-10:00 pm", "Lunch daily 11:00 am-3:00 pm"],
    "Phone number": ["(510) 555-0199", "(415) 555-0123", "(206) 555-0147"],
}


def opentable_page(i: int) -> str:
    items = []
    for j, (title, values) in enumerate(OPENTABLE_VALUES.items()):
        value = values[(i + j) % len(values)]
        items.append(
            f'<div class="item"><span style="font-size:20px;font-weight:bold">{title}</span>'
            f"<span>{value}</span></div>"
        )
    return (
        f'<html><body><div class="ad-slot"><b style="font-size:24px">Book tonight</b></div>'
        f'<div class="restaurant"><h1>Restaurant number {i}</h1><div id="details">{"".join(items)}</div>'
        f"<p>Review {i}: lovely evening</p></div><footer>&copy; 2020 OpenTable</footer></body></html>"
    )


@pytest.fixture
def sushi_page():
    return strip_boilerplate(parse_html(SUSHI_HTML))


@pytest.fixture
def opentable_pages():
    return [strip_boilerplate(parse_html(opentable_page(i))) for i in range(12)]


def make_snapshot(html: str | bytes, aggregator: str = "agg", entity: str = "e1") -> PageSnapshot:
    data = html.encode("utf-8") if isinstance(html, str) else html
    return PageSnapshot(aggregator, entity, f"https://{aggregator}.example/{entity}",
                        datetime(2020, 1, 1, tzinfo=timezone.utc), data)


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory):
    """Three aggregators by twenty entities, templates mined to ``templates/``."""
    from bew.corpus import load_corpus, sample_entity_ids
    from bew.template import extract_template

    root = tmp_path_factory.mktemp("synth")
    result = generate_synthetic_corpus(root, n_aggregators=3, n_entities=20, dropout=0.2, seed=7)
    index = load_corpus(root)
    for agg in index.aggregator_ids():
        pages = [index.page(agg, e) for e in sample_entity_ids(index, agg, 100)]
        extract_template(pages, agg).save(root / "templates" / f"{agg}.json")
    return result


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
