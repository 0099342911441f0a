"""Top-k exact match, token F1 and section precision."""
from __future__ import annotations

import re
import string
import unicodedata
from collections import Counter
from typing import Sequence

_ARTICLES_RE = re.compile(r"\b(a|an|the)\b")


def _strip_punctuation(text: str) -> str:
    return "".join(
        ch for ch in text
        if ch not in string.punctuation and not unicodedata.category(ch).startswith("P")
    )


def normalize_answer(text: str) -> list[str]:
    """Lowercase, drop punctuation and articles, split on whitespace."""
    text = _strip_punctuation(text.lower())
    return _ARTICLES_RE.sub(" ", text).split()


def token_f1(prediction: str, gold: str) -> float:
    pred, ref = normalize_answer(prediction), normalize_answer(gold)
    if not pred and not ref:
        return 1.0
    if not pred or not ref:
        return 0.0
    overlap = sum((Counter(pred) & Counter(ref)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred)
    recall = overlap / len(ref)
    return 2 * precision * recall / (precision + recall)


def exact_match_at_k(predictions: Sequence[str], golds: Sequence[str], k: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    refs = {tuple(normalize_answer(g)) for g in golds}
    return int(any(tuple(normalize_answer(p)) in refs for p in predictions[:k]))


def f1_at_k(predictions: Sequence[str], golds: Sequence[str], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    return max((token_f1(p, g) for p in predictions[:k] for g in golds), default=0.0)


def sec_precision_at_k(predicted_sections: Sequence[str], gold_titles: Sequence[str], k: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    refs = {tuple(normalize_answer(t)) for t in gold_titles}
    return int(any(tuple(normalize_answer(t)) in refs for t in predicted_sections[:k]))
