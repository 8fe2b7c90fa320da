import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from synkw.discriminant import (FEATURE_NAMES, TRANSLATION_SENTINEL,
                                CorpusStats, LabeledPair, LinearClassifier,
                                _max_match_len, extract_features, filter_pairs,
                                load_external_scores, load_labeled_pairs,
                                loss_and_grad, score, train_classifier)
from synkw.errors import (MissingScore, MissingStats, ParseError,
                          ScoreOutOfRange, SingleClassCorpus)
from synkw.text_core import CONTENT
from conftest import make_pos_lexicon


def _stats(keywords, extra_vocab=()):
    words = set(extra_vocab)
    for k in keywords:
        words.update(k.split())
    lex = make_pos_lexicon({w: CONTENT for w in words})
    return CorpusStats.build(keywords, lex)


# --- features ---------------------------------------------------------------

def _oracle_mml(a, b):
    # brute force over all contiguous substrings
    best = 0
    for i in range(len(a)):
        for j in range(i + 1, len(a) + 1):
            sub = a[i:j]
            for k in range(len(b) - len(sub) + 1):
                if b[k:k + len(sub)] == sub:
                    best = max(best, len(sub))
    return best


def test_max_match_len_hand_case():
    assert _max_match_len(["a", "b", "c"], ["b", "c", "d"]) == 2


@given(st.lists(st.sampled_from("abcd"), max_size=8),
       st.lists(st.sampled_from("abcd"), max_size=8))
def test_max_match_len_matches_oracle(a, b):
    assert _max_match_len(a, b) == _oracle_mml(a, b)


def test_features_identity_pair():
    stats = _stats(["a b c", "x y"])
    f = extract_features("a b c", "a b c", stats)
    assert f.max_match_len == 3
    assert f.match_ratio == pytest.approx(1.0)
    assert f.miss_ratio == pytest.approx(0.0)
    assert f.bleu1 == pytest.approx(1.0)
    assert f.bleu2 == pytest.approx(1.0)
    assert f.translation_logprob == TRANSLATION_SENTINEL


def test_features_disjoint_pair():
    stats = _stats(["a b", "x y"])
    f = extract_features("a b", "x y", stats)
    assert f.max_match_len == 0
    assert f.match_ratio == pytest.approx(0.0)
    assert f.miss_ratio == pytest.approx(1.0)
    assert f.bm25 == pytest.approx(0.0)


def test_features_hand_ratios():
    stats = _stats(["b c d"], extra_vocab=["a"])
    f = extract_features("a b c", "b c d", stats)
    assert f.max_match_len == 2
    assert f.match_ratio == pytest.approx(2.0 / 3.0)
    assert f.miss_ratio == pytest.approx(1.0 / 3.0)


def test_bm25_hand_value():
    stats = _stats(["a b", "a c", "d e"])
    # query "a", doc ["a", "b"]: tf=1, dl=2, avgdl=2
    idf = math.log(1 + (3 - 2 + 0.5) / (2 + 0.5))
    k1, b = 1.2, 0.75
    norm = k1 * (1 - b + b * 2 / 2.0)
    want = idf * 1 * (k1 + 1) / (1 + norm)
    assert stats.bm25(["a"], ["a", "b"]) == pytest.approx(want, abs=1e-12)


def test_stats_require_nonempty_repo():
    lex = make_pos_lexicon({"a": CONTENT})
    with pytest.raises(MissingStats):
        CorpusStats.build([], lex)
    with pytest.raises(MissingStats):
        extract_features("a", "a", None)


# --- gradient and training --------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n, d = 12, len(FEATURE_NAMES)
    X = rng.normal(size=(n, d))
    y = rng.integers(0, 2, size=n).astype(np.float64)
    w = rng.normal(size=d)
    b = float(rng.normal())
    l2 = 0.01
    _, gw, gb = loss_and_grad(w, b, X, y, l2)
    h = 1e-6
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        lp, _, _ = loss_and_grad(w + e, b, X, y, l2)
        lm, _, _ = loss_and_grad(w - e, b, X, y, l2)
        num = (lp - lm) / (2 * h)
        assert abs(num - gw[i]) <= 1e-5 * max(1.0, abs(num))
    lp, _, _ = loss_and_grad(w, b + h, X, y, l2)
    lm, _, _ = loss_and_grad(w, b - h, X, y, l2)
    num = (lp - lm) / (2 * h)
    assert abs(num - gb) <= 1e-5 * max(1.0, abs(num))


def _separable_data():
    pos = [LabeledPair("a b c", "a b c", 1), LabeledPair("a b", "a b", 1),
           LabeledPair("b c", "b c", 1)]
    neg = [LabeledPair("a b c", "x y", 0), LabeledPair("a b", "y x", 0),
           LabeledPair("b c", "x", 0)]
    return pos + neg


def test_training_separates_easy_data():
    stats = _stats(["a b c", "a b", "b c", "x y", "y x", "x"])
    fn = lambda q, k: extract_features(q, k, stats)
    data = _separable_data()
    clf = train_classifier(data, fn)
    for d in data:
        assert (score(clf, (d.query, d.keyword), fn) >= 0.5) == bool(d.label)
    assert clf.loss_history[-1] < clf.loss_history[0]


def test_training_loss_decreases():
    stats = _stats(["a b c", "x y"])
    fn = lambda q, k: extract_features(q, k, stats)
    clf = train_classifier(_separable_data(), fn, epochs=50)
    for a, b in zip(clf.loss_history, clf.loss_history[1:]):
        assert b <= a + 1e-9


def test_training_rejects_single_class():
    stats = _stats(["a b"])
    fn = lambda q, k: extract_features(q, k, stats)
    with pytest.raises(SingleClassCorpus):
        train_classifier([LabeledPair("a", "a", 1)], fn)


def test_zero_classifier_scores_half():
    d = len(FEATURE_NAMES)
    clf = LinearClassifier(np.zeros(d), 0.0, np.zeros(d), np.ones(d))
    assert clf.score_vector([1.0] * d) == pytest.approx(0.5)


def test_score_monotone_in_positive_weight_feature():
    d = len(FEATURE_NAMES)
    w = np.zeros(d)
    w[0] = 2.0
    clf = LinearClassifier(w, 0.0, np.zeros(d), np.ones(d))
    lo = clf.score_vector([0.0] * d)
    hi = clf.score_vector([3.0] + [0.0] * (d - 1))
    assert hi > lo
    # hand arithmetic
    assert hi == pytest.approx(1.0 / (1.0 + math.exp(-6.0)), abs=1e-12)


def test_classifier_snapshot_round_trip(tmp_path):
    stats = _stats(["a b c", "x y"])
    fn = lambda q, k: extract_features(q, k, stats)
    clf = train_classifier(_separable_data(), fn, epochs=40)
    p = tmp_path / "clf.txt"
    clf.save(p)
    loaded = LinearClassifier.load(p)
    for d in _separable_data():
        v = fn(d.query, d.keyword).vector()
        assert loaded.score_vector(v) == clf.score_vector(v)


# --- external scores --------------------------------------------------------

def test_load_external_scores(tmp_path):
    p = tmp_path / "scores.tsv"
    p.write_text("q1\tk1\t0.9\nq1\tk2\t0.1\nq2\tk1\t0.5\n", encoding="utf-8")
    s = load_external_scores(p)
    assert s[("q1", "k1")] == 0.9 and len(s) == 3 and s.duplicates == 0


def test_external_scores_out_of_range(tmp_path):
    p = tmp_path / "scores.tsv"
    p.write_text("q\tk\t1.5\n", encoding="utf-8")
    with pytest.raises(ScoreOutOfRange):
        load_external_scores(p)


def test_external_scores_duplicate_last_wins(tmp_path):
    p = tmp_path / "scores.tsv"
    p.write_text("q\tk\t0.2\nq\tk\t0.8\n", encoding="utf-8")
    s = load_external_scores(p)
    assert s[("q", "k")] == 0.8 and s.duplicates == 1


def test_external_scores_malformed_line_number(tmp_path):
    p = tmp_path / "scores.tsv"
    p.write_text("q\tk\t0.2\nbroken line\n", encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_external_scores(p)
    assert exc.value.line_no == 2


# --- filtering --------------------------------------------------------------

PAIRS = [("q", "k1"), ("q", "k2"), ("q", "k3")]
SCORES = {("q", "k1"): 0.3, ("q", "k2"): 0.9, ("q", "k3"): 0.95}


def test_filter_threshold_zero_keeps_all():
    assert filter_pairs(PAIRS, SCORES, 0.0) == PAIRS


def test_filter_threshold_above_one_drops_all():
    assert filter_pairs(PAIRS, SCORES, 1.01) == []


def test_filter_mixed_threshold():
    assert filter_pairs(PAIRS, SCORES, 0.9) == [("q", "k2"), ("q", "k3")]


def test_filter_missing_score():
    with pytest.raises(MissingScore):
        filter_pairs([("q", "nope")], SCORES, 0.5)


def test_filter_accepts_callable():
    out = filter_pairs(PAIRS, lambda q, k: SCORES[(q, k)], 0.9)
    assert out == [("q", "k2"), ("q", "k3")]


@given(st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=20),
       st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=1))
def test_filter_monotone_in_threshold(values, t1, t2):
    lo, hi = min(t1, t2), max(t1, t2)
    pairs = [("q", "k%d" % i) for i in range(len(values))]
    table = dict(zip(pairs, values))
    kept_hi = filter_pairs(pairs, table, hi)
    kept_lo = filter_pairs(pairs, table, lo)
    assert set(kept_hi) <= set(kept_lo)


# --- labeled pairs ----------------------------------------------------------

def test_load_labeled_pairs(tmp_path):
    p = tmp_path / "l.tsv"
    p.write_text("q1\tk1\t1\nq2\tk2\t0\n", encoding="utf-8")
    assert load_labeled_pairs(p) == [LabeledPair("q1", "k1", 1),
                                     LabeledPair("q2", "k2", 0)]


def test_load_labeled_pairs_bad_label(tmp_path):
    p = tmp_path / "l.tsv"
    p.write_text("q\tk\t2\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_labeled_pairs(p)
