from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bew.corpus import load_corpus
from bew.dom import collect_text_leaves, parse_html, resolve_path, strip_boilerplate
from bew.errors import EmptyTemplate, PathError
from bew.harness.synth import generate_synthetic_corpus
from bew.template import (
    Template,
    TitleSignature,
    build_frequency_map,
    extract_template,
    find_section_boundary,
    select_immutables,
    select_title_immutables,
)

from .conftest import opentable_page

TITLES = ["Dining Style", "Cuisines", "Hours of operation", "Phone number"]


def page(html):
    return strip_boilerplate(parse_html(html))


def leaf(root, text):
    return next(lf for lf in collect_text_leaves(root) if lf.text == text)


def test_frequency_counts_pages_not_occurrences():
    pages = [page("<p>x</p><p>x</p><p>y</p>"), page("<p>x</p>")]
    freq = build_frequency_map(pages)
    assert freq["x"] == 2 and freq["y"] == 1


def test_frequency_single_page_and_empty():
    assert set(build_frequency_map([page("<p>a</p><p>b</p>")]).values()) == {1}
    with pytest.raises(ValueError):
        build_frequency_map([])


def test_frequency_98_of_100():
    pages = [page("<h2>Hours of operation</h2>" if i >= 2 else "<p>nothing</p>") for i in range(100)]
    assert build_frequency_map(pages)["Hours of operation"] == 98


def test_select_immutables_threshold_rules():
    freq = {"Common": 60, "Rare": 1, "All": 100, "x": 100, "L" * 61: 100}
    assert select_immutables(freq, 100, 0.5) == {"Common", "All"}
    assert select_immutables(freq, 100, 1.0) == {"All"}
    with pytest.raises(ValueError):
        select_immutables(freq, 100, 0)


def test_title_styling_test():
    pages = [
        page(f'<p>body {i}</p><p>more {i}</p><span style="font-size:20px;font-weight:bold">Dining Style</span>'
             "<p>Mon-Fri</p>")
        for i in range(4)
    ]
    sigs = select_title_immutables({"Dining Style", "Mon-Fri"}, pages)
    assert [s.text for s in sigs] == ["Dining Style"]
    assert sigs[0].bold and sigs[0].min_font_size_px == 20 and sigs[0].page_frequency == 1.0
    assert select_title_immutables(set(), pages) == []


def test_title_needs_majority_of_occurrences():
    styled = '<p>a</p><p>b</p><b style="font-size:20px">Menu</b>'
    plain = "<p>a</p><p>b</p><p>Menu</p>"
    assert select_title_immutables({"Menu"}, [page(styled), page(plain), page(plain)]) == []
    assert [s.text for s in select_title_immutables({"Menu"}, [page(styled), page(styled), page(plain)])] == ["Menu"]


def test_sushi_boundary_stops_below_competing_title(sushi_page):
    title = leaf(sushi_page, "Dining Style")
    boundary = find_section_boundary(sushi_page, title, TITLES)
    node = resolve_path(sushi_page, boundary)
    assert node.tag == "div" and node.attributes["class"] == "item"
    texts = [n.text for _, n in node.walk() if n.is_text]
    assert texts == ["Dining Style", "Casual Dining"]
    # one level higher holds "Cuisines"
    parent = resolve_path(sushi_page, boundary[:-1])
    assert parent.attributes.get("id") == "details"


def test_single_title_flat_body_takes_whole_body():
    root = page("<body><h2>Only</h2><p>a</p><p>b</p></body>")
    boundary = find_section_boundary(root, leaf(root, "Only"), ["Only"])
    assert resolve_path(root, boundary).tag == "#document"


def test_degenerate_boundary_is_title_parent():
    # hand trace: text A -> h2 (no other text) -> div (holds title B) => stop; return h2
    root = page("<div><h2>A</h2><h2>B</h2><p>x</p></div>")
    a = leaf(root, "A")
    assert find_section_boundary(root, a, ["A", "B"]) == a.node_path[:-1]
    assert resolve_path(root, a.node_path[:-1]).tag == "h2"


def test_title_sharing_its_parent_with_another_title():
    root = page("<h2>A<br>B</h2><p>x</p>")
    a = leaf(root, "A")
    assert find_section_boundary(root, a, ["A", "B"]) == a.node_path


def test_boundary_rejects_bad_leaf(sushi_page):
    title = leaf(sushi_page, "Cuisines")
    bad = type(title)(title.text, title.style, (9, 9, 9))
    with pytest.raises(PathError):
        find_section_boundary(sushi_page, bad, TITLES)


def test_opentable_template(opentable_pages):
    template = extract_template(opentable_pages, "opentable")
    assert set(template.title_texts) == set(TITLES)
    assert all(t.page_frequency == 1.0 for t in template.titles)
    assert "Book tonight" not in template.title_texts  # ad stripped


def test_identical_pages_have_full_frequency():
    pages = [page(opentable_page(0))] * 100
    template = extract_template(pages, "same")
    assert {t.page_frequency for t in template.titles} == {1.0}
    # value texts are immutable here but not styled as titles
    assert "Casual Dining" not in template.title_texts


def test_empty_template_and_too_few_pages():
    with pytest.raises(EmptyTemplate):
        extract_template([page("<p>a</p>"), page("<p>a</p>")], "plain")
    with pytest.raises(ValueError):
        extract_template([page("<h2>a</h2>")], "one")


def test_titles_ordered_by_frequency_then_document_order():
    pages = [page("<h2>Zeta</h2><p>1</p><h2>Alpha</h2><p>2</p>") for _ in range(3)]
    pages.append(page("<h2>Alpha</h2><p>3</p>"))
    template = extract_template(pages, "o")
    assert template.title_texts == ["Alpha", "Zeta"]
    pages = [page("<h2>Zeta</h2><p>1</p><h2>Alpha</h2><p>2</p>") for _ in range(3)]
    assert extract_template(pages, "o").title_texts == ["Zeta", "Alpha"]


def test_template_json_roundtrip(tmp_path, opentable_pages):
    created = datetime(2021, 3, 4, 5, 6, 7, tzinfo=timezone.utc)
    template = extract_template(opentable_pages, "opentable", created_at=created)
    path = tmp_path / "templates" / "opentable.json"
    template.save(path)
    import json

    data = json.loads(path.read_text())
    assert list(data) == ["aggregator", "sample_size", "created_at", "titles"]
    assert list(data["titles"][0]) == ["text", "min_font_size_px", "bold", "page_frequency"]
    assert Template.load(path) == template


def test_signature_validation():
    with pytest.raises(ValueError):
        TitleSignature("x", 16, True, 0.0)
    with pytest.raises(ValueError):
        Template("a", 2, (TitleSignature("X", 16, True, 1), TitleSignature("x", 16, True, 1)))


def test_synthetic_recovery(tmp_path):
    titles = ("Hours", "Cuisines", "Parking")
    generate_synthetic_corpus(tmp_path, titles, n_aggregators=1, n_entities=40, dropout=0.2, seed=1)
    index = load_corpus(tmp_path)
    pages = [index.page("agg0", e) for e in index.entity_ids("agg0")]
    assert set(extract_template(pages, "agg0").title_texts) == set(titles)


@pytest.fixture(scope="module")
def synth_pages(tmp_path_factory):
    root = tmp_path_factory.mktemp("mono")
    generate_synthetic_corpus(root, n_aggregators=1, n_entities=30, dropout=0.4, seed=5)
    index = load_corpus(root)
    return [index.page("agg0", e) for e in index.entity_ids("agg0")]


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_raising_theta_never_adds_titles(synth_pages, a, b):
    lo, hi = sorted((a, b))

    def titles(theta):
        try:
            return set(extract_template(synth_pages, "agg0", theta).title_texts)
        except EmptyTemplate:
            return set()

    assert titles(hi) <= titles(lo)


def test_extraction_is_deterministic(synth_pages):
    created = datetime(2020, 1, 1, tzinfo=timezone.utc)
    assert extract_template(synth_pages, "agg0", created_at=created) == extract_template(
        list(synth_pages), "agg0", created_at=created
    )


def test_boundaries_do_not_nest(synth_pages):
    template = extract_template(synth_pages, "agg0")
    for root in synth_pages:
        titles = [lf for lf in collect_text_leaves(root) if lf.text in template.title_texts]
        bounds = {t.node_path: find_section_boundary(root, t, template.title_texts) for t in titles}
        for t_path, b in bounds.items():
            for other in bounds:
                if other != t_path:
                    assert other[: len(b)] != b
