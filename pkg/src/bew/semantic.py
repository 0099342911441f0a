"""Text embedders and the two-encoder match function.

Two deterministic providers are built in:

``lexical``
    letter-trigram hashing of ``#word#`` tokens. It rewards literal word and
    character overlap.
``semantic``
    an average of per-word vectors over content words. Vectors come from an
    optional word-vector file; unknown words fall back to a hashed vector
    built from the word and its character n-grams, so inflections stay close.

``remote:<model>`` providers call an HTTP embedding service.
"""
from __future__ import annotations

import hashlib
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import requests

from .dom import normalize_text
from .errors import DimensionMismatch, EmptyText, RemoteUnavailable

DEFAULT_DIMENSION = 512
MIN_DIMENSION = 16
REMOTE_PARALLELISM = 8
REMOTE_BATCH = 64

_WORD_RE = re.compile(r"[^\W_]+")

STOPWORDS = frozenset(
    """a an the and or but if of at by for with about to from in on into onto over under
    is are was were be been being am do does did doing have has had having can could will
    would should shall may might must it its this that these those there here what
    which who whom whose when where why how i me my we our you your he him his she her
    they them their any some please tell know""".split()
)


@dataclass(frozen=True)
class EmbedderSpec:
    """Which provider to use and how to configure it.

    ``provider_id`` is ``"lexical"``, ``"semantic"`` or ``"remote:<model>"``.
    """

    provider_id: str = "lexical"
    dimension: int = DEFAULT_DIMENSION
    seed: int = 0
    vocab_path: Optional[str] = None
    endpoint: Optional[str] = None
    timeout: float = 30.0

    def __post_init__(self):
        if self.dimension < MIN_DIMENSION:
            raise ValueError(f"dimension must be >= {MIN_DIMENSION}, got {self.dimension}")
        if self.provider_id not in ("lexical", "semantic") and not self.is_remote:
            raise ValueError(f"unknown provider {self.provider_id!r}")
        if self.is_remote and not self.endpoint:
            raise ValueError("remote providers need an endpoint")

    @property
    def is_remote(self) -> bool:
        return self.provider_id.startswith("remote:") and len(self.provider_id) > len("remote:")

    @property
    def model(self) -> str:
        return self.provider_id.split(":", 1)[1] if self.is_remote else self.provider_id


LEXICAL = EmbedderSpec("lexical")
SEMANTIC = EmbedderSpec("semantic")


@dataclass(frozen=True, eq=False)
class Embedding:
    vector: np.ndarray
    provider_id: str

    def __len__(self):
        return len(self.vector)


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise EmptyText("embedding has zero norm")
    return vector / norm


def _bucket(seed: int, token: str, dimension: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, salt=seed.to_bytes(8, "little")).digest()
    return int.from_bytes(digest, "little") % dimension


def letter_trigrams(text: str) -> list[str]:
    """Trigrams of each lowercased ``#word#`` token of ``text``."""
    grams = []
    words = _WORD_RE.findall(text.lower()) or [text.lower()]
    for word in words:
        marked = f"#{word}#"
        grams.extend(marked[i : i + 3] for i in range(len(marked) - 2))
    return grams


def _lexical(spec: EmbedderSpec, text: str) -> np.ndarray:
    vector = np.zeros(spec.dimension)
    for gram in letter_trigrams(text):
        vector[_bucket(spec.seed, gram, spec.dimension)] += 1.0
    return vector


@lru_cache(maxsize=200_000)
def _random_unit(seed: int, token: str, dimension: int) -> np.ndarray:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, salt=seed.to_bytes(8, "little")).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    v = rng.standard_normal(dimension)
    v /= np.linalg.norm(v)
    v.setflags(write=False)
    return v


@lru_cache(maxsize=200_000)
def _fallback_word_vector(seed: int, word: str, dimension: int) -> np.ndarray:
    marked = f"<{word}>"
    grams = [marked[i : i + 3] for i in range(len(marked) - 2)]
    v = _random_unit(seed, "w:" + word, dimension).copy()
    for gram in grams:
        v += _random_unit(seed, "g:" + gram, dimension) / len(grams)
    v /= np.linalg.norm(v)
    v.setflags(write=False)
    return v


_vocab_lock = threading.Lock()
_vocabularies: dict[tuple, dict[str, np.ndarray]] = {}


def load_word_vectors(path: str | Path, dimension: int | None = None) -> dict[str, np.ndarray]:
    """Read a ``token f1 f2 ...`` text file into a dict of unit vectors."""
    vectors = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip().split()
            if len(parts) < 2:
                continue
            values = np.asarray([float(x) for x in parts[1:]])
            if dimension is not None and len(values) != dimension:
                raise ValueError(f"{path}:{lineno}: expected {dimension} values, got {len(values)}")
            norm = np.linalg.norm(values)
            if norm > 0:
                vectors[parts[0].lower()] = values / norm
    return vectors


def _vocabulary(spec: EmbedderSpec) -> dict[str, np.ndarray]:
    if spec.vocab_path is None:
        return {}
    path = str(spec.vocab_path)
    stat = Path(path).stat()
    key = (path, stat.st_mtime_ns, stat.st_size)
    with _vocab_lock:
        if key not in _vocabularies:
            _vocabularies[key] = load_word_vectors(path, spec.dimension)
        return _vocabularies[key]


def content_words(text: str) -> list[str]:
    words = _WORD_RE.findall(text.lower())
    content = [w for w in words if w not in STOPWORDS]
    return content or words


def _semantic(spec: EmbedderSpec, text: str) -> np.ndarray:
    words = content_words(text)
    if not words:
        return _random_unit(spec.seed, "t:" + text.lower(), spec.dimension).copy()
    vocab = _vocabulary(spec)
    total = np.zeros(spec.dimension)
    for word in words:
        vec = vocab.get(word)
        total += vec if vec is not None else _fallback_word_vector(spec.seed, word, spec.dimension)
    return total


def _remote_batch(spec: EmbedderSpec, texts: Sequence[str], session=None) -> list[np.ndarray]:
    url = spec.endpoint.rstrip("/") + "/embed"
    http = session or requests
    try:
        resp = http.post(url, json={"model": spec.model, "texts": list(texts)}, timeout=spec.timeout)
        resp.raise_for_status()
        vectors = resp.json()["vectors"]
    except (requests.RequestException, ValueError, KeyError, TypeError) as exc:
        raise RemoteUnavailable(f"{url}: {exc}") from exc
    if len(vectors) != len(texts):
        raise RemoteUnavailable(f"{url}: expected {len(texts)} vectors, got {len(vectors)}")
    out = []
    for v in vectors:
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 1 or len(arr) != spec.dimension:
            raise RemoteUnavailable(f"{url}: vector of shape {arr.shape}, expected ({spec.dimension},)")
        out.append(arr)
    return out


def _compute(spec: EmbedderSpec, text: str) -> Embedding:
    if spec.provider_id == "lexical":
        raw = _lexical(spec, text)
    elif spec.provider_id == "semantic":
        raw = _semantic(spec, text)
    else:
        raw = _remote_batch(spec, [text])[0]
    vector = _unit(raw)
    vector.setflags(write=False)
    return Embedding(vector, spec.provider_id)


class EmbeddingCache:
    """Thread-safe memo of embeddings keyed by ``(spec, text)``."""

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()

    def get(self, spec: EmbedderSpec, text: str) -> Optional[Embedding]:
        return self._data.get((spec, text))

    def put(self, spec: EmbedderSpec, text: str, emb: Embedding) -> Embedding:
        with self._lock:
            return self._data.setdefault((spec, text), emb)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()

    def __len__(self):
        return len(self._data)


default_cache = EmbeddingCache()


def _prepare(text: str) -> str:
    text = normalize_text(text)
    if not text:
        raise EmptyText("cannot embed empty text")
    return text


def embed(spec: EmbedderSpec, text: str, cache: EmbeddingCache | None = default_cache) -> Embedding:
    """Embed ``text`` as a unit vector; pass ``cache=None`` to bypass the memo."""
    text = _prepare(text)
    if cache is not None:
        hit = cache.get(spec, text)
        if hit is not None:
            return hit
    emb = _compute(spec, text)
    return cache.put(spec, text, emb) if cache is not None else emb


def embed_many(
    spec: EmbedderSpec,
    texts: Sequence[str],
    cache: EmbeddingCache | None = default_cache,
    parallelism: int = REMOTE_PARALLELISM,
    session=None,
) -> list[Embedding]:
    """Embed a batch; remote providers send batches concurrently."""
    prepared = [_prepare(t) for t in texts]
    if not spec.is_remote:
        return [embed(spec, t, cache) for t in prepared]
    missing = sorted({t for t in prepared if cache is None or cache.get(spec, t) is None})
    batches = [missing[i : i + REMOTE_BATCH] for i in range(0, len(missing), REMOTE_BATCH)]
    fresh: dict[str, Embedding] = {}
    if batches:
        with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
            results = pool.map(lambda b: _remote_batch(spec, b, session), batches)
            for batch, vectors in zip(batches, results):
                for text, raw in zip(batch, vectors):
                    vector = _unit(raw)
                    vector.setflags(write=False)
                    emb = Embedding(vector, spec.provider_id)
                    fresh[text] = cache.put(spec, text, emb) if cache is not None else emb
    return [fresh.get(t) or cache.get(spec, t) for t in prepared]


def cosine(a: Embedding, b: Embedding) -> float:
    if a.provider_id != b.provider_id or len(a) != len(b):
        raise DimensionMismatch(
            f"cannot compare {a.provider_id}[{len(a)}] with {b.provider_id}[{len(b)}]"
        )
    return float(min(1.0, max(-1.0, np.dot(a.vector, b.vector))))


ABLATIONS = ("none", "lexical_only", "semantic_only", "no_prior")


def match(
    q: str,
    t: str,
    embedders: tuple[EmbedderSpec, EmbedderSpec] = (SEMANTIC, LEXICAL),
    ablation: str = "none",
    weights: tuple[float, float] = (0.5, 0.5),
    cache: EmbeddingCache | None = default_cache,
) -> float:
    """Relevance of text ``t`` to question ``q`` in ``[0, 1]``.

    ``embedders`` is ``(semantic_spec, lexical_spec)``. The result is the
    weighted mean of both cosines, or a single cosine under the
    ``lexical_only`` / ``semantic_only`` ablations, floored at zero.
    """
    semantic_spec, lexical_spec = embedders
    if ablation == "lexical_only":
        score = cosine(embed(lexical_spec, q, cache), embed(lexical_spec, t, cache))
    elif ablation == "semantic_only":
        score = cosine(embed(semantic_spec, q, cache), embed(semantic_spec, t, cache))
    else:
        w_sem, w_lex = weights
        score = (
            w_sem * cosine(embed(semantic_spec, q, cache), embed(semantic_spec, t, cache))
            + w_lex * cosine(embed(lexical_spec, q, cache), embed(lexical_spec, t, cache))
        ) / (w_sem + w_lex)
    return max(0.0, min(1.0, score))


Matcher = Callable[[str, str], float]
