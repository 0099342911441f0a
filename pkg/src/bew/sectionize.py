"""Splitting one entity page into titled sections using a mined template."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .dom import PageSnapshot, TextLeaf, UiNode, collect_text_leaves, normalize_text
from .template import Template, find_section_boundary, find_title_leaves, title_key

log = logging.getLogger(__name__)

UNTITLED = "untitled"

_SENTENCE_END_RE = re.compile(r"(?<=[.!?])\s+")
_TOKEN_RE = re.compile(r"[^\W_]+")
_JSONLD_SKIP_KEYS = frozenset({"@context", "@type", "@id"})


@dataclass(frozen=True)
class Phrase:
    text: str
    origin: tuple

    def __post_init__(self):
        if not self.text:
            raise ValueError("phrase text is empty")


@dataclass
class Section:
    title: str
    phrases: list = field(default_factory=list)
    structured: list = field(default_factory=list)
    boundary_path: tuple = ()

    @property
    def is_untitled(self) -> bool:
        return self.title == UNTITLED

    @property
    def body(self) -> list[Phrase]:
        """Phrases excluding the leading title phrase."""
        return list(self.phrases) if self.is_untitled else list(self.phrases[1:])

    def scoring_texts(self) -> list[str]:
        return [p.text for p in self.phrases] + list(self.structured)


@dataclass
class PageSections:
    snapshot: Optional[PageSnapshot]
    sections: list = field(default_factory=list)

    @property
    def aggregator_id(self) -> Optional[str]:
        return self.snapshot.aggregator_id if self.snapshot else None

    @property
    def entity_id(self) -> Optional[str]:
        return self.snapshot.entity_id if self.snapshot else None

    def to_json(self) -> dict:
        return {
            "sections": [
                {"title": s.title, "phrases": [p.text for p in s.phrases], "structured": list(s.structured)}
                for s in self.sections
            ]
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False)


def _inside(path: tuple, boundary: tuple) -> bool:
    return path[: len(boundary)] == boundary


def segment_phrases(section_leaves: Sequence[TextLeaf]) -> list[Phrase]:
    """One phrase per leaf; leaves with sentence punctuation are split further."""
    phrases = []
    for leaf in section_leaves:
        for piece in _SENTENCE_END_RE.split(leaf.text):
            piece = piece.strip()
            if piece:
                phrases.append(Phrase(piece, tuple(leaf.node_path)))
    return phrases


# ---------------------------------------------------------------- structured data


def _tokens(text: str) -> set[str]:
    return {t.casefold() for t in _TOKEN_RE.findall(text)}


def _scalar(value) -> Optional[str]:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float, str)):
        text = normalize_text(str(value))
        return text or None
    return None


def _flatten(key: str, value, out: list) -> None:
    if isinstance(value, dict):
        for sub, item in value.items():
            if sub not in _JSONLD_SKIP_KEYS:
                _flatten(f"{key}.{sub}", item, out)
    elif isinstance(value, list):
        scalars = [s for s in map(_scalar, value) if s]
        if scalars:
            out.append((key, ", ".join(scalars)))
        for item in value:
            if isinstance(item, (dict, list)):
                _flatten(key, item, out)
    else:
        text = _scalar(value)
        if text:
            out.append((key, text))


def jsonld_properties(page: UiNode) -> list[tuple[str, str]]:
    """Flatten every JSON-LD block of a page into ``(property, value)`` pairs.

    Nested objects produce dotted property names. Malformed blocks are
    skipped.
    """
    props: list[tuple[str, str]] = []
    for raw in page.structured_blocks:
        try:
            data = json.loads(raw)
        except ValueError as exc:
            log.warning("skipping malformed JSON-LD block: %s", exc)
            continue
        items = data if isinstance(data, list) else [data]
        expanded = []
        for item in items:
            if isinstance(item, dict) and isinstance(item.get("@graph"), list):
                expanded.extend(item["@graph"])
            else:
                expanded.append(item)
        for item in expanded:
            if not isinstance(item, dict):
                continue
            for key, value in item.items():
                if key not in _JSONLD_SKIP_KEYS:
                    _flatten(key, value, props)
    return props


def microdata_properties(page: UiNode) -> list[tuple[tuple, str, str]]:
    """Return ``(node_path, itemprop, value)`` for every microdata property."""
    props = []
    for path, node in page.walk():
        if node.is_text or "itemprop" not in node.attributes:
            continue
        if "content" in node.attributes:
            value = normalize_text(node.attributes["content"])
        elif node.tag in ("a", "link") and "href" in node.attributes:
            value = node.attributes["href"].strip()
        elif node.tag in ("time", "data") and ("datetime" in node.attributes or "value" in node.attributes):
            value = normalize_text(node.attributes.get("datetime") or node.attributes.get("value", ""))
        else:
            value = normalize_text(" ".join(n.text for _, n in node.walk() if n.is_text))
        if not value:
            continue
        for name in node.attributes["itemprop"].split():
            props.append((path, name, value))
    return props


def _jsonld_matches(prop: str, title: str) -> bool:
    names = set()
    for part in prop.split("."):
        names |= _tokens(part)
    return bool(names & _tokens(title))


def extract_structured_data(page: UiNode, section: Section, siblings: Sequence[Section] = ()) -> list[str]:
    """Structured annotations belonging to ``section`` as ``"property: value"``.

    Microdata is attached by DOM position inside the section boundary.
    JSON-LD has no position, so a property is attached when its name shares
    a token with the section title. For the untitled section, ``siblings``
    (the page's titled sections) claim their own annotations first and the
    remainder is returned.
    """
    claimed = [s for s in siblings if s is not section and not s.is_untitled]
    out = []
    for path, name, value in microdata_properties(page):
        if section.is_untitled:
            if any(_inside(path, s.boundary_path) for s in claimed):
                continue
        elif not _inside(path, section.boundary_path):
            continue
        out.append(f"{name}: {value}")
    for prop, value in jsonld_properties(page):
        if section.is_untitled:
            if any(_jsonld_matches(prop, s.title) for s in claimed):
                continue
        elif not _jsonld_matches(prop, section.title):
            continue
        out.append(f"{prop}: {value}")
    return out


# ---------------------------------------------------------------- sectionizing


def sectionize_page(page: UiNode, template: Template, snapshot: PageSnapshot | None = None) -> PageSections:
    """Apply ``template`` to a stripped page.

    Sections follow the document order of their titles; text outside every
    section boundary goes into a trailing ``untitled`` section.
    """
    leaves = collect_text_leaves(page)
    titles = template.title_texts
    canonical = {title_key(t): t for t in titles}

    sections: list[Section] = []
    used: set[str] = set()
    title_paths: set[tuple] = set()
    for leaf in find_title_leaves(leaves, titles):
        key = title_key(leaf.text)
        if key in used:
            continue
        used.add(key)
        boundary = find_section_boundary(page, leaf, titles)
        body = [
            other for other in leaves
            if other.node_path != leaf.node_path and _inside(other.node_path, boundary)
        ]
        phrases = [Phrase(leaf.text, tuple(leaf.node_path))] + segment_phrases(body)
        sections.append(Section(canonical[key], phrases, [], boundary))
        title_paths.add(tuple(leaf.node_path))

    rest = [
        leaf for leaf in leaves
        if tuple(leaf.node_path) not in title_paths
        and not any(_inside(leaf.node_path, s.boundary_path) for s in sections)
    ]
    for section in sections:
        section.structured.extend(extract_structured_data(page, section, sections))
    untitled = Section(UNTITLED, segment_phrases(rest), [], ())
    untitled.structured.extend(extract_structured_data(page, untitled, sections))
    if untitled.phrases or untitled.structured or not sections:
        sections.append(untitled)
    return PageSections(snapshot, sections)


def section_leaf_paths(page_sections: PageSections) -> Iterable[tuple]:
    for section in page_sections.sections:
        for phrase in section.phrases:
            yield phrase.origin
