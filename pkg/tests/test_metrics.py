import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bew.harness.metrics import exact_match_at_k, f1_at_k, normalize_answer, sec_precision_at_k, token_f1


def test_normalize_answer():
    assert normalize_answer("Casual Elegant.") == ["casual", "elegant"]
    assert normalize_answer("The patio") == ["patio"]
    assert normalize_answer("") == []
    assert normalize_answer("  an  Apple, a day!  ") == ["apple", "day"]
    assert normalize_answer("5:00 pm–10:00 pm") == ["500", "pm1000", "pm"]


def test_exact_match_hand_cases():
    assert exact_match_at_k(["Casual Elegant"], ["casual elegant"], 1) == 1
    assert exact_match_at_k(["wrong", "Valet parking"], ["valet parking"], 1) == 0
    assert exact_match_at_k(["wrong", "Valet parking"], ["valet parking"], 2) == 1
    assert exact_match_at_k(["a b"], ["c"], 3) == 0
    assert exact_match_at_k([], ["c"], 1) == 0


def test_f1_hand_cases():
    assert f1_at_k(["casual"], ["casual elegant"], 1) == pytest.approx(2 * 1 * 0.5 / 1.5)
    assert f1_at_k(["Casual Elegant"], ["Casual Elegant"], 1) == 1.0
    assert f1_at_k(["x y"], ["z"], 1) == 0.0
    assert f1_at_k(["the"], ["a"], 1) == 1.0  # both empty after normalization
    assert f1_at_k(["the"], ["z"], 1) == 0.0
    assert f1_at_k(["z", "casual elegant"], ["casual", "elegant casual"], 2) == 1.0
    assert token_f1("a a b", "a b b") == pytest.approx(2 / 3)


def test_sec_precision_hand_cases():
    assert sec_precision_at_k(["Dining Style"], ["Dining Style"], 1) == 1
    assert sec_precision_at_k(["A", "B", "Dining Style"], ["dining style"], 3) == 1
    assert sec_precision_at_k(["A", "B", "Dining Style"], ["dining style"], 2) == 0
    assert sec_precision_at_k(["A"], ["B"], 1) == 0


def test_k_must_be_positive():
    for fn in (exact_match_at_k, f1_at_k, sec_precision_at_k):
        with pytest.raises(ValueError):
            fn(["a"], ["a"], 0)


_WORDS = ["casual", "elegant", "valet", "parking", "the", "open", "daily", "5pm", "Jazz", "a"]
phrases = st.lists(st.sampled_from(_WORDS), min_size=0, max_size=4).map(" ".join)


@settings(max_examples=300, deadline=None)
@given(st.lists(phrases, min_size=1, max_size=6), st.lists(phrases, min_size=1, max_size=3))
def test_monotone_in_k_and_em_implies_f1(preds, golds):
    ems = [exact_match_at_k(preds, golds, k) for k in range(1, 7)]
    f1s = [f1_at_k(preds, golds, k) for k in range(1, 7)]
    assert ems == sorted(ems) and f1s == sorted(f1s)
    assert all(f == 1.0 for e, f in zip(ems, f1s) if e == 1)
    assert all(0.0 <= f <= 1.0 for f in f1s)


@settings(max_examples=200, deadline=None)
@given(st.lists(phrases, min_size=1, max_size=4), st.lists(phrases, min_size=1, max_size=4), st.randoms())
def test_invariant_to_gold_order(preds, golds, rnd):
    shuffled = list(golds)
    rnd.shuffle(shuffled)
    for k in (1, 2, 3):
        assert exact_match_at_k(preds, golds, k) == exact_match_at_k(preds, shuffled, k)
        assert f1_at_k(preds, golds, k) == f1_at_k(preds, shuffled, k)
        assert sec_precision_at_k(preds, golds, k) == sec_precision_at_k(preds, shuffled, k)
