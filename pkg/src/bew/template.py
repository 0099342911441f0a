"""Mining per-aggregator section templates from sample entity pages."""
from __future__ import annotations

import json
import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .dom import TextLeaf, UiNode, collect_text_leaves, resolve_path
from .errors import EmptyTemplate, PathError

DEFAULT_THETA = 0.5
MIN_IMMUTABLE_LEN = 2
MAX_IMMUTABLE_LEN = 60
BOLD_WEIGHT = 600


def title_key(text: str) -> str:
    """Key used when comparing title text across pages."""
    return text.casefold()


@dataclass(frozen=True)
class TitleSignature:
    text: str
    min_font_size_px: float
    bold: bool
    page_frequency: float

    def __post_init__(self):
        if not 0 < self.page_frequency <= 1:
            raise ValueError(f"page_frequency must be in (0, 1], got {self.page_frequency}")


@dataclass(frozen=True)
class Template:
    aggregator_id: str
    sample_size: int
    titles: tuple = ()
    created_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def __post_init__(self):
        keys = [title_key(t.text) for t in self.titles]
        if len(keys) != len(set(keys)):
            raise ValueError("duplicate title text in template")

    @property
    def title_texts(self) -> list[str]:
        return [t.text for t in self.titles]

    def to_json(self) -> dict:
        return {
            "aggregator": self.aggregator_id,
            "sample_size": self.sample_size,
            "created_at": self.created_at.isoformat(),
            "titles": [asdict(t) for t in self.titles],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Template":
        created = datetime.fromisoformat(data["created_at"].replace("Z", "+00:00"))
        titles = tuple(
            TitleSignature(
                text=t["text"],
                min_font_size_px=float(t["min_font_size_px"]),
                bold=bool(t["bold"]),
                page_frequency=float(t["page_frequency"]),
            )
            for t in data["titles"]
        )
        return cls(data["aggregator"], int(data["sample_size"]), titles, created)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Template":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def build_frequency_map(pages: Sequence[UiNode]) -> Counter:
    """Count, for each leaf text, the number of pages it appears on."""
    if not pages:
        raise ValueError("at least one page is required")
    freq: Counter = Counter()
    for page in pages:
        freq.update({leaf.text for leaf in collect_text_leaves(page)})
    return freq


def select_immutables(freq: Mapping[str, int], n_pages: int, theta: float = DEFAULT_THETA) -> set[str]:
    if not 0 < theta <= 1:
        raise ValueError(f"theta must be in (0, 1], got {theta}")
    return {
        text
        for text, count in freq.items()
        if count / n_pages >= theta and MIN_IMMUTABLE_LEN <= len(text) <= MAX_IMMUTABLE_LEN
    }


def _is_title_styled(leaf: TextLeaf, median_size: float) -> bool:
    style = leaf.style
    return style.is_heading_tag or (style.font_size_px > median_size and style.font_weight >= BOLD_WEIGHT)


def select_title_immutables(immutables: Iterable[str], pages: Sequence[UiNode]) -> list[TitleSignature]:
    """Keep immutables rendered with title-like styling in most occurrences.

    An occurrence is title-like when it sits in a heading tag, or when it is
    bold (weight >= 600) and larger than the median leaf font size of its
    page. The result is in first-seen document order.
    """
    immutables = set(immutables)
    if not immutables or not pages:
        return []
    occurrences: Counter = Counter()
    titled: Counter = Counter()
    bold: Counter = Counter()
    sizes: dict[str, float] = {}
    page_counts: Counter = Counter()
    first_seen: dict[str, int] = {}
    for page in pages:
        leaves = collect_text_leaves(page)
        if not leaves:
            continue
        median_size = statistics.median(leaf.style.font_size_px for leaf in leaves)
        on_page = set()
        for leaf in leaves:
            if leaf.text not in immutables:
                continue
            first_seen.setdefault(leaf.text, len(first_seen))
            on_page.add(leaf.text)
            occurrences[leaf.text] += 1
            if _is_title_styled(leaf, median_size):
                titled[leaf.text] += 1
                bold[leaf.text] += leaf.style.bold
                size = leaf.style.font_size_px
                sizes[leaf.text] = min(size, sizes.get(leaf.text, size))
        page_counts.update(on_page)

    result = []
    for text in sorted(first_seen, key=first_seen.get):
        if 2 * titled[text] <= occurrences[text]:
            continue
        result.append(
            TitleSignature(
                text=text,
                min_font_size_px=sizes[text],
                bold=2 * bold[text] > titled[text],
                page_frequency=page_counts[text] / len(pages),
            )
        )
    return result


def find_title_leaves(leaves: Sequence[TextLeaf], all_titles: Iterable[str]) -> list[TextLeaf]:
    keys = {title_key(t) for t in all_titles}
    return [leaf for leaf in leaves if title_key(leaf.text) in keys]


def find_section_boundary(page: UiNode, title_leaf: TextLeaf, all_titles: Iterable[str]) -> tuple:
    """Return the node path of the section anchored at ``title_leaf``.

    Ascends from the title leaf and keeps the highest ancestor whose subtree
    holds another text leaf but no other title leaf. When no ancestor gains
    a second text before a competing title appears, the title's parent is
    used, or the title leaf itself if even the parent holds another title.
    """
    path = tuple(title_leaf.node_path)
    node = resolve_path(page, path)
    if not node.is_text or node.text != title_leaf.text:
        raise PathError(f"path {path} does not hold the title {title_leaf.text!r}")
    if not path:
        raise PathError("the document root cannot be a title leaf")
    keys = {title_key(t) for t in all_titles}

    best = None
    parent_clean = False
    for depth in range(len(path) - 1, -1, -1):
        ancestor = path[:depth]
        subtree = resolve_path(page, ancestor)
        other_title = has_text = False
        for rel, n in subtree.walk():
            if not n.is_text or n.style.hidden or ancestor + rel == path:
                continue
            if title_key(n.text) in keys:
                other_title = True
                break
            has_text = True
        if other_title:
            break
        if depth == len(path) - 1:
            parent_clean = True
        if has_text:
            best = ancestor
    if best is not None:
        return best
    return path[:-1] if parent_clean else path


def extract_template(
    pages: Sequence[UiNode],
    aggregator_id: str,
    theta: float = DEFAULT_THETA,
    created_at: datetime | None = None,
) -> Template:
    """Mine the title immutables of one aggregator from stripped pages.

    Raises :class:`EmptyTemplate` when no title immutable survives.
    """
    if len(pages) < 2:
        raise ValueError("template extraction needs at least two pages")
    freq = build_frequency_map(pages)
    immutables = select_immutables(freq, len(pages), theta)
    titles = select_title_immutables(immutables, pages)
    if not titles:
        raise EmptyTemplate(f"no title immutables found for {aggregator_id!r}")
    # first-seen order is preserved by the stable sort
    titles = sorted(titles, key=lambda t: -t.page_frequency)
    return Template(
        aggregator_id=aggregator_id,
        sample_size=len(pages),
        titles=tuple(_dedupe_titles(titles)),
        created_at=created_at or datetime.now(timezone.utc),
    )


def _dedupe_titles(titles):
    seen = set()
    for t in titles:
        if title_key(t.text) not in seen:
            seen.add(title_key(t.text))
            yield t
