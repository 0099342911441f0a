"""On-disk snapshot and template store, samplers and the page fetcher.

Layout under a corpus root::

    corpus/<aggregator>/<entity-slug>/page.html
    corpus/<aggregator>/<entity-slug>/meta.json
    templates/<aggregator>.json
"""
from __future__ import annotations

import json
import logging
import os
import random
import re
import tempfile
import threading
import time
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence
from urllib.parse import urlparse

import requests

from .dom import PageSnapshot, UiNode, load_page
from .errors import EmptyTemplate, FetchError
from .sectionize import PageSections, sectionize_page
from .template import Template

log = logging.getLogger(__name__)

PAGE_FILE = "page.html"
META_FILE = "meta.json"
META_KEYS = ("aggregator", "entity", "url", "fetched_at")
DEFAULT_MAX_AGE = timedelta(days=7)
DEFAULT_TIMEOUT = 15.0
DEFAULT_WORKERS = 4
MAX_REDIRECTS = 5
USER_AGENT = "bew-fetch/0.1 (+offline-first snapshot cache)"


def slugify(name: str) -> str:
    text = unicodedata.normalize("NFKD", name).encode("ascii", "ignore").decode("ascii")
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def parse_timestamp(value: str) -> datetime:
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    return ts if ts.tzinfo else ts.replace(tzinfo=timezone.utc)


def offline_forced() -> bool:
    return os.environ.get("BEW_OFFLINE", "") == "1"


@dataclass
class EntityEntry:
    entity_id: str
    directory: Path
    meta: dict

    @property
    def page_path(self) -> Path:
        return self.directory / PAGE_FILE

    @property
    def fetched_at(self) -> datetime:
        return parse_timestamp(self.meta["fetched_at"])


@dataclass
class AggregatorEntry:
    aggregator_id: str
    template_path: Optional[Path] = None
    entities: dict = field(default_factory=dict)


@dataclass
class CorpusIndex:
    """Index of snapshots and templates with memoized parsing.

    Parsed pages and sectionized pages are cached per instance since
    snapshots are immutable once written.
    """

    root: Path
    aggregators: dict = field(default_factory=dict)

    def __post_init__(self):
        self._lock = threading.Lock()
        self._pages: dict = {}
        self._sections: dict = {}
        self._templates: dict = {}

    # -- lookups

    def aggregator_ids(self) -> list[str]:
        return sorted(self.aggregators)

    def entity_ids(self, aggregator_id: str) -> list[str]:
        return sorted(self.aggregators[aggregator_id].entities)

    def snapshot(self, aggregator_id: str, entity_id: str) -> PageSnapshot:
        entry = self.aggregators[aggregator_id].entities[entity_id]
        return read_snapshot(entry.directory)

    def template(self, aggregator_id: str) -> Optional[Template]:
        agg = self.aggregators.get(aggregator_id)
        if agg is None or agg.template_path is None:
            return None
        with self._lock:
            if aggregator_id not in self._templates:
                self._templates[aggregator_id] = Template.load(agg.template_path)
            return self._templates[aggregator_id]

    def set_template(self, template: Template) -> None:
        agg = self.aggregators.setdefault(template.aggregator_id, AggregatorEntry(template.aggregator_id))
        with self._lock:
            self._templates[template.aggregator_id] = template
            self._sections = {k: v for k, v in self._sections.items() if k[0] != template.aggregator_id}
        if agg.template_path is None:
            agg.template_path = Path("<memory>")

    def find_entity(self, aggregator_id: str, names: Iterable[str]) -> Optional[str]:
        """Entity id of the first of ``names`` with a page in ``aggregator_id``."""
        entities = self.aggregators.get(aggregator_id, AggregatorEntry(aggregator_id)).entities
        for name in names:
            for candidate in (name, slugify(name)):
                if candidate in entities:
                    return candidate
            folded = name.casefold()
            for entity_id in sorted(entities):
                if entity_id.casefold() == folded:
                    return entity_id
        return None

    # -- parsed views

    def page(self, aggregator_id: str, entity_id: str) -> UiNode:
        key = (aggregator_id, entity_id)
        with self._lock:
            cached = self._pages.get(key)
        if cached is None:
            cached = load_page(self.snapshot(aggregator_id, entity_id))
            with self._lock:
                cached = self._pages.setdefault(key, cached)
        return cached

    def sections(self, aggregator_id: str, entity_id: str) -> PageSections:
        key = (aggregator_id, entity_id)
        with self._lock:
            cached = self._sections.get(key)
        if cached is None:
            template = self.template(aggregator_id)
            if template is None:
                raise EmptyTemplate(f"aggregator {aggregator_id!r} has no template")
            page = self.page(aggregator_id, entity_id)
            cached = sectionize_page(page, template, self.snapshot(aggregator_id, entity_id))
            with self._lock:
                cached = self._sections.setdefault(key, cached)
        return cached

    def usable_aggregators(self) -> list[str]:
        return [a for a in self.aggregator_ids() if self.aggregators[a].template_path and self.aggregators[a].entities]


def _corpus_dir(root: Path) -> Path:
    nested = root / "corpus"
    return nested if nested.is_dir() else root


def read_meta(directory: Path) -> dict:
    meta = json.loads((directory / META_FILE).read_text(encoding="utf-8"))
    if not isinstance(meta, dict) or any(not isinstance(meta.get(k), str) or not meta.get(k) for k in META_KEYS):
        raise ValueError(f"meta.json must hold non-empty string keys {META_KEYS}")
    parse_timestamp(meta["fetched_at"])
    return meta


def read_snapshot(directory: Path) -> PageSnapshot:
    meta = read_meta(directory)
    return PageSnapshot(
        aggregator_id=meta["aggregator"],
        entity_id=meta["entity"],
        source_url=meta["url"],
        fetched_at=parse_timestamp(meta["fetched_at"]),
        html=(directory / PAGE_FILE).read_bytes(),
    )


def load_corpus(root: str | Path, templates_dir: str | Path | None = None) -> CorpusIndex:
    """Scan a corpus root; entries with missing or malformed metadata are skipped.

    ``root`` may be the directory holding ``corpus/`` or the ``corpus``
    directory itself. Templates default to ``<root>/templates``.
    """
    root = Path(root)
    if not root.is_dir():
        raise OSError(f"corpus root {root} is not a readable directory")
    index = CorpusIndex(root)
    corpus_dir = _corpus_dir(root)
    for agg_dir in sorted(p for p in corpus_dir.iterdir() if p.is_dir()):
        if agg_dir.name == "templates" and corpus_dir == root:
            continue
        agg = AggregatorEntry(agg_dir.name)
        for entity_dir in sorted(p for p in agg_dir.iterdir() if p.is_dir()):
            if not (entity_dir / PAGE_FILE).is_file():
                log.warning("skipping %s: no %s", entity_dir, PAGE_FILE)
                continue
            try:
                meta = read_meta(entity_dir)
            except (OSError, ValueError) as exc:
                log.warning("skipping %s: bad %s (%s)", entity_dir, META_FILE, exc)
                continue
            if entity_dir.name in agg.entities:
                log.warning("skipping %s: duplicate entity", entity_dir)
                continue
            agg.entities[entity_dir.name] = EntityEntry(entity_dir.name, entity_dir, meta)
        if agg.entities:
            index.aggregators[agg.aggregator_id] = agg

    templates = Path(templates_dir) if templates_dir is not None else root / "templates"
    if templates.is_dir():
        for path in sorted(templates.glob("*.json")):
            agg = index.aggregators.get(path.stem)
            if agg is not None:
                agg.template_path = path
    return index


def sample_pages(
    index: CorpusIndex,
    aggregator_id: str,
    n: int,
    seed: int = 0,
    exclude_entity: str | None = None,
) -> list[PageSnapshot]:
    return [index.snapshot(aggregator_id, e) for e in sample_entity_ids(index, aggregator_id, n, seed, exclude_entity)]


def sample_entity_ids(index, aggregator_id, n, seed=0, exclude_entity=None) -> list[str]:
    """Seeded sample of ``min(n, available)`` entity ids, excluding one entity."""
    if aggregator_id not in index.aggregators:
        raise KeyError(f"unknown aggregator {aggregator_id!r}")
    pool = [e for e in index.entity_ids(aggregator_id) if e != exclude_entity]
    rng = random.Random(f"{seed}:{aggregator_id}")
    if n >= len(pool):
        return pool
    return sorted(rng.sample(pool, n))


# ---------------------------------------------------------------- writing


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def meta_bytes(snap: PageSnapshot) -> bytes:
    meta = {
        "aggregator": snap.aggregator_id,
        "entity": snap.entity_id,
        "url": snap.source_url,
        "fetched_at": snap.fetched_at.isoformat(),
    }
    return (json.dumps(meta, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def save_snapshot(root: str | Path, snap: PageSnapshot) -> Path:
    """Write a snapshot into the corpus layout; the page lands before its metadata.

    ``load_corpus`` ignores directories without a valid ``meta.json``, so a
    crash between the two renames never leaves a half-indexed entry.
    """
    directory = Path(root) / "corpus" / snap.aggregator_id / slugify(snap.entity_id)
    _atomic_write(directory / PAGE_FILE, snap.html)
    _atomic_write(directory / META_FILE, meta_bytes(snap))
    return directory


# ---------------------------------------------------------------- fetching


@dataclass(frozen=True)
class FetchJob:
    url: str
    aggregator_id: str
    entity_id: str
    retries: int = 2
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self):
        if self.retries < 0:
            raise ValueError("retry budget must be >= 0")

    @classmethod
    def from_json(cls, data: Mapping) -> "FetchJob":
        return cls(
            url=data["url"],
            aggregator_id=data["aggregator"],
            entity_id=data["entity"],
            retries=int(data.get("retries", 2)),
            timeout=float(data.get("timeout", DEFAULT_TIMEOUT)),
        )


def resolve_url(patterns: Mapping[str, str], aggregator_id: str, entity_name: str) -> str:
    """Fill a per-aggregator pattern such as ``https://site/r/{slug}``."""
    return patterns[aggregator_id].format(slug=slugify(entity_name), name=entity_name)


def _cached(root: Path, job: FetchJob) -> Optional[PageSnapshot]:
    directory = root / "corpus" / job.aggregator_id / slugify(job.entity_id)
    try:
        return read_snapshot(directory)
    except (OSError, ValueError):
        return None


def _get(session: requests.Session, job: FetchJob, user_agent: str, backoff: float) -> bytes:
    last = "no attempt made"
    for attempt in range(job.retries + 1):
        if attempt:
            time.sleep(backoff * 2 ** (attempt - 1))
        try:
            resp = session.get(job.url, timeout=job.timeout, headers={"User-Agent": user_agent}, allow_redirects=True)
        except requests.TooManyRedirects as exc:
            raise FetchError(job, f"too many redirects: {exc}") from exc
        except requests.RequestException as exc:
            last = f"{type(exc).__name__}: {exc}"
            continue
        if resp.status_code >= 500:
            last = f"HTTP {resp.status_code}"
            continue
        if resp.status_code >= 400:
            raise FetchError(job, f"HTTP {resp.status_code}")
        if not resp.content:
            raise FetchError(job, "empty body")
        return resp.content
    raise FetchError(job, last)


def fetch_entity_pages(
    jobs: Sequence[FetchJob],
    root: str | Path,
    offline: bool | None = None,
    max_age: timedelta = DEFAULT_MAX_AGE,
    workers: int = DEFAULT_WORKERS,
    user_agent: str = USER_AGENT,
    allowed_hosts: Mapping[str, Iterable[str]] | None = None,
    backoff: float = 0.5,
    now: datetime | None = None,
) -> tuple[list[PageSnapshot], list[FetchError]]:
    """Fetch entity pages into the corpus, preferring fresh cached copies.

    Returns ``(snapshots, errors)``; a failing job never aborts the others.
    Offline mode (or ``BEW_OFFLINE=1``) serves the cache only.
    """
    root = Path(root)
    offline = offline_forced() if offline is None else (offline or offline_forced())
    now = now or datetime.now(timezone.utc)

    def run(job: FetchJob):
        cached = _cached(root, job)
        if cached is not None and (offline or now - cached.fetched_at <= max_age):
            return cached
        if offline:
            raise FetchError(job, "not cached and offline mode is on")
        if allowed_hosts is not None and job.aggregator_id in allowed_hosts:
            host = urlparse(job.url).hostname or ""
            if host not in set(allowed_hosts[job.aggregator_id]):
                raise FetchError(job, f"host {host!r} not allowed for {job.aggregator_id}")
        with requests.Session() as session:
            session.max_redirects = MAX_REDIRECTS
            body = _get(session, job, user_agent, backoff)
        snap = PageSnapshot(job.aggregator_id, job.entity_id, job.url, datetime.now(timezone.utc), body)
        save_snapshot(root, snap)
        return snap

    def attempt(job):
        try:
            return run(job)
        except FetchError as exc:
            log.warning("fetch failed: %s", exc)
            return exc

    snapshots, errors = [], []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for result in pool.map(attempt, jobs):
            (errors if isinstance(result, FetchError) else snapshots).append(result)
    return snapshots, errors
