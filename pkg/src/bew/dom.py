"""Static HTML snapshot parsing into a style-resolved UI tree.

Pages are parsed with :mod:`html.parser` into a small immutable tree. Each
run of character data becomes its own ``#text`` leaf node so that every
piece of visible text has a unique node path. Font size, font weight,
heading membership and visibility are resolved from user-agent defaults,
simple ``<style>`` rules and inline ``style`` attributes, and inherited
parent to child.
"""
from __future__ import annotations

import codecs
import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from html.parser import HTMLParser
from typing import Iterable, Iterator, Optional, Sequence

from .errors import ParseError, PathError

TEXT_TAG = "#text"
ROOT_TAG = "#document"

BASE_FONT_SIZE = 16.0
HEADING_SIZES = {"h1": 32.0, "h2": 24.0, "h3": 19.0, "h4": 16.0, "h5": 13.0, "h6": 11.0}
BOLD_TAGS = frozenset({"b", "strong", "th"})
UA_HIDDEN_TAGS = frozenset({"head", "title", "script", "style", "template", "noscript"})
REMOVED_TAGS = frozenset({"script", "style", "iframe", "noscript", "template"})

DEFAULT_BOILERPLATE_TOKENS = ("ad", "ads", "banner", "footer", "copyright", "nav", "cookie", "promo")

VOID_TAGS = frozenset(
    {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta",
     "param", "source", "track", "wbr"}
)
_P_CLOSERS = frozenset(
    {"address", "article", "aside", "blockquote", "div", "dl", "fieldset", "footer",
     "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "main", "nav", "ol",
     "p", "pre", "section", "table", "ul"}
)
# start tag -> (tags it implicitly closes, tags that stop the search)
_IMPLIED_END = {
    "li": ({"li"}, {"ul", "ol"}),
    "dt": ({"dt", "dd"}, {"dl"}),
    "dd": ({"dt", "dd"}, {"dl"}),
    "tr": ({"tr", "td", "th"}, {"table", "tbody", "thead", "tfoot"}),
    "td": ({"td", "th"}, {"tr", "table"}),
    "th": ({"td", "th"}, {"tr", "table"}),
    "option": ({"option"}, {"select", "datalist"}),
}

_WS_RE = re.compile(r"\s+")
_CHARSET_RE = re.compile(rb"""<meta[^>]+charset\s*=\s*["']?\s*([A-Za-z0-9_.:-]+)""", re.IGNORECASE)
_CSS_RULE_RE = re.compile(r"([^{}]+)\{([^{}]*)\}")
_CSS_COMMENT_RE = re.compile(r"/\*.*?\*/", re.DOTALL)
_SIMPLE_SELECTOR_RE = re.compile(r"^([a-zA-Z][a-zA-Z0-9-]*)?((?:[.#][A-Za-z0-9_-]+)*)$")
_LENGTH_RE = re.compile(r"^([0-9]*\.?[0-9]+)\s*(px|pt|em|rem|%)?$")
_FONT_KEYWORDS = {
    "xx-small": 9.0, "x-small": 10.0, "small": 13.0, "medium": 16.0,
    "large": 18.0, "x-large": 24.0, "xx-large": 32.0, "xxx-large": 48.0,
}


def normalize_text(text: str) -> str:
    """Trim and collapse runs of Unicode whitespace (NBSP included)."""
    return _WS_RE.sub(" ", text).strip()


@dataclass(frozen=True)
class PageSnapshot:
    """One saved entity webpage and its provenance."""

    aggregator_id: str
    entity_id: str
    source_url: str
    fetched_at: datetime
    html: bytes

    def __post_init__(self):
        if not self.aggregator_id or not self.entity_id:
            raise ValueError("aggregator_id and entity_id must be non-empty")
        if not self.html:
            raise ValueError("snapshot html is empty")


@dataclass(frozen=True)
class StyleMap:
    font_size_px: float = BASE_FONT_SIZE
    font_weight: int = 400
    is_heading_tag: bool = False
    hidden: bool = False

    def __post_init__(self):
        if not self.font_size_px > 0:
            raise ValueError(f"font size must be positive, got {self.font_size_px}")
        if self.font_weight not in range(100, 1000, 100):
            raise ValueError(f"font weight must be one of 100..900, got {self.font_weight}")

    @property
    def bold(self) -> bool:
        return self.font_weight >= 600


@dataclass(frozen=True)
class UiNode:
    """A node of the parsed UI tree; ``#text`` nodes carry the leaf text."""

    tag: str
    attributes: dict = field(default_factory=dict)
    style: StyleMap = field(default_factory=StyleMap)
    children: tuple = ()
    text: Optional[str] = None
    # raw JSON-LD script bodies, only populated on the document root
    structured_blocks: tuple = ()

    @property
    def is_text(self) -> bool:
        return self.tag == TEXT_TAG

    def walk(self, path: tuple = ()) -> Iterator[tuple[tuple, "UiNode"]]:
        """Yield ``(path, node)`` pairs depth first, this node included."""
        yield path, self
        for i, child in enumerate(self.children):
            yield from child.walk(path + (i,))


@dataclass(frozen=True)
class TextLeaf:
    text: str
    style: StyleMap
    node_path: tuple


def resolve_path(root: UiNode, path: Sequence[int]) -> UiNode:
    node = root
    for depth, index in enumerate(path):
        if not 0 <= index < len(node.children):
            raise PathError(f"path {tuple(path)} breaks at depth {depth}")
        node = node.children[index]
    return node


# ---------------------------------------------------------------- styling


def _parse_declarations(text: str) -> dict[str, str]:
    decls = {}
    for item in text.split(";"):
        name, sep, value = item.partition(":")
        if sep:
            value = value.replace("!important", "").strip().lower()
            decls[name.strip().lower()] = value
    return decls


@dataclass
class _Rule:
    tag: Optional[str]
    classes: frozenset
    ident: Optional[str]
    decls: dict
    specificity: tuple
    order: int

    def matches(self, tag: str, attrs: dict) -> bool:
        if self.tag is not None and self.tag != tag:
            return False
        if self.ident is not None and attrs.get("id") != self.ident:
            return False
        if self.classes and not self.classes <= set(attrs.get("class", "").split()):
            return False
        return True


def parse_stylesheet(css: str, start_order: int = 0) -> list[_Rule]:
    """Parse simple selectors (``tag``, ``.cls``, ``#id`` and compounds).

    Rules with combinators, pseudo classes or at-rules are ignored.
    """
    rules = []
    css = _CSS_COMMENT_RE.sub("", css)
    order = start_order
    for selectors, body in _CSS_RULE_RE.findall(css):
        decls = _parse_declarations(body)
        for selector in selectors.split(","):
            selector = selector.strip()
            m = _SIMPLE_SELECTOR_RE.match(selector)
            if not selector or m is None or selector.startswith("@"):
                continue
            tag = m.group(1).lower() if m.group(1) else None
            parts = re.findall(r"([.#])([A-Za-z0-9_-]+)", m.group(2))
            classes = frozenset(name for kind, name in parts if kind == ".")
            idents = [name for kind, name in parts if kind == "#"]
            if len(idents) > 1:
                continue
            spec = (len(idents), len(classes), int(tag is not None))
            rules.append(_Rule(tag, classes, idents[0] if idents else None, decls, spec, order))
            order += 1
    return rules


def _font_size(value: str, parent_size: float) -> Optional[float]:
    if value in _FONT_KEYWORDS:
        return _FONT_KEYWORDS[value]
    if value == "smaller":
        return parent_size / 1.2
    if value == "larger":
        return parent_size * 1.2
    m = _LENGTH_RE.match(value)
    if m is None:
        return None
    number, unit = float(m.group(1)), m.group(2) or "px"
    size = {
        "px": number,
        "pt": number * 4.0 / 3.0,
        "em": number * parent_size,
        "rem": number * BASE_FONT_SIZE,
        "%": number * parent_size / 100.0,
    }[unit]
    return size if size > 0 else None


def _font_weight(value: str, parent_weight: int) -> Optional[int]:
    if value == "normal":
        return 400
    if value == "bold":
        return 700
    if value == "bolder":
        return 700 if parent_weight < 600 else 900
    if value == "lighter":
        return 100 if parent_weight < 600 else 400
    try:
        number = float(value)
    except ValueError:
        return None
    return int(min(900, max(100, round(number / 100.0) * 100)))


def _resolve_style(tag: str, attrs: dict, parent: StyleMap, rules: Sequence[_Rule]) -> StyleMap:
    size, weight = parent.font_size_px, parent.font_weight
    heading, hidden = parent.is_heading_tag, parent.hidden
    if tag in HEADING_SIZES:
        size, weight, heading = HEADING_SIZES[tag], 700, True
    elif tag in BOLD_TAGS:
        weight = 700 if parent.font_weight < 600 else 900
    elif tag == "small":
        size = parent.font_size_px / 1.2
    elif tag == "big":
        size = parent.font_size_px * 1.2
    if tag in UA_HIDDEN_TAGS or "hidden" in attrs:
        hidden = True
    if tag == "input" and attrs.get("type", "").lower() == "hidden":
        hidden = True

    decls: dict[str, str] = {}
    matched = [r for r in rules if r.matches(tag, attrs)]
    for rule in sorted(matched, key=lambda r: (r.specificity, r.order)):
        decls.update(rule.decls)
    decls.update(_parse_declarations(attrs.get("style", "")))

    if "font-size" in decls:
        size = _font_size(decls["font-size"], parent.font_size_px) or size
    if "font-weight" in decls:
        weight = _font_weight(decls["font-weight"], parent.font_weight) or weight
    if decls.get("display") == "none" or decls.get("visibility") in ("hidden", "collapse"):
        hidden = True
    return StyleMap(font_size_px=size, font_weight=weight, is_heading_tag=heading, hidden=hidden)


# ---------------------------------------------------------------- parsing


@dataclass
class _Builder:
    tag: str
    attrs: dict
    children: list = field(default_factory=list)
    text: Optional[str] = None


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = _Builder(ROOT_TAG, {})
        self.stack = [self.root]
        self.css: list[str] = []
        self.jsonld: list[str] = []

    def _close_until(self, tags: set, stops: set) -> None:
        for i in range(len(self.stack) - 1, 0, -1):
            tag = self.stack[i].tag
            if tag in stops:
                return
            if tag in tags:
                del self.stack[i:]
                return

    def handle_starttag(self, tag, attrs):
        attributes = {k.lower(): (v if v is not None else "") for k, v in attrs}
        if tag in _P_CLOSERS:
            self._close_until({"p"}, {"div", "section", "article", "li", "td", "th", "body"})
        if tag in _IMPLIED_END:
            closes, stops = _IMPLIED_END[tag]
            self._close_until(closes, stops)
        node = _Builder(tag, attributes)
        self.stack[-1].children.append(node)
        if tag not in VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag not in VOID_TAGS and self.stack[-1].tag == tag:
            self.stack.pop()

    def handle_endtag(self, tag):
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return

    def handle_data(self, data):
        current = self.stack[-1]
        if current.tag == "style":
            self.css.append(data)
            return
        if current.tag == "script":
            if current.attrs.get("type", "").strip().lower() == "application/ld+json":
                self.jsonld.append(data)
            return
        text = normalize_text(data)
        if text:
            current.children.append(_Builder(TEXT_TAG, {}, text=text))


def _freeze(builder: _Builder, parent_style: StyleMap, rules) -> UiNode:
    if builder.tag == TEXT_TAG:
        return UiNode(TEXT_TAG, {}, parent_style, (), builder.text)
    if builder.tag == ROOT_TAG:
        style = parent_style
    else:
        style = _resolve_style(builder.tag, builder.attrs, parent_style, rules)
    children = tuple(_freeze(child, style, rules) for child in builder.children)
    return UiNode(builder.tag, dict(builder.attrs), style, children)


def decode_html(data: bytes) -> str:
    """Decode snapshot bytes using a BOM, a declared charset, or UTF-8."""
    if data.startswith(codecs.BOM_UTF8):
        data = data[len(codecs.BOM_UTF8):]
    encoding = "utf-8"
    m = _CHARSET_RE.search(data[:4096])
    if m:
        declared = m.group(1).decode("ascii", "replace")
        try:
            encoding = codecs.lookup(declared).name
        except LookupError:
            pass
    try:
        return data.decode(encoding)
    except UnicodeDecodeError as exc:
        raise ParseError(f"snapshot is not decodable as {encoding}: {exc}") from exc


def parse_html(html: str | bytes) -> UiNode:
    if isinstance(html, bytes):
        html = decode_html(html)
    builder = _TreeBuilder()
    builder.feed(html)
    builder.close()
    rules = parse_stylesheet("\n".join(builder.css))
    root = _freeze(builder.root, StyleMap(), rules)
    return replace(root, structured_blocks=tuple(builder.jsonld))


def parse_snapshot(snap: PageSnapshot) -> UiNode:
    return parse_html(snap.html)


# ---------------------------------------------------------------- stripping


def _name_pieces(value: str) -> set[str]:
    # "adBanner top_nav" -> {"ad", "banner", "top", "nav"}
    value = re.sub(r"([a-z0-9])([A-Z])", r"\1 \2", value)
    return {piece.lower() for piece in re.split(r"[^A-Za-z0-9]+", value) if piece}


def is_boilerplate(node: UiNode, tokens: Iterable[str] = DEFAULT_BOILERPLATE_TOKENS) -> bool:
    if node.is_text:
        return False
    tokens = {t.lower() for t in tokens}
    if node.tag in REMOVED_TAGS or node.tag in tokens or node.style.hidden:
        return True
    pieces = _name_pieces(node.attributes.get("class", "")) | _name_pieces(node.attributes.get("id", ""))
    return bool(pieces & tokens)


def strip_boilerplate(root: UiNode, tokens: Iterable[str] = DEFAULT_BOILERPLATE_TOKENS) -> UiNode:
    """Return a copy without boilerplate, hidden and script-like subtrees.

    A node is boilerplate when its tag name, or a word of its ``class`` or
    ``id`` attribute, equals one of ``tokens`` (case-insensitive). The root
    is never removed.
    """
    tokens = tuple(tokens)

    def strip(node: UiNode) -> UiNode:
        kept = tuple(strip(c) for c in node.children if not is_boilerplate(c, tokens))
        return node if kept == node.children else replace(node, children=kept)

    return strip(root)


def collect_text_leaves(root: UiNode) -> list[TextLeaf]:
    return [
        TextLeaf(node.text, node.style, path)
        for path, node in root.walk()
        if node.is_text and not node.style.hidden
    ]


def load_page(snap: PageSnapshot, tokens: Iterable[str] = DEFAULT_BOILERPLATE_TOKENS) -> UiNode:
    """Parse a snapshot and strip its boilerplate in one step."""
    return strip_boilerplate(parse_snapshot(snap), tokens)
