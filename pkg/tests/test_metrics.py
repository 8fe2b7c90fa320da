import itertools
import math
import random

import pytest
from hypothesis import given, strategies as st

from synkw.errors import (EmptyCandidate, EmptyCorpus, EmptyReference,
                          SampleTooLarge, SingleClass, ZeroSearches)
from synkw.metrics import (auc, bleu_n, diff_ratio, dist_n, online_metrics,
                           precision_from_labels, precision_sample,
                           recall_at_precision)


# --- diff ratio -------------------------------------------------------------

def test_diff_ratio_identical_sets():
    s = {("q", "k1"), ("q", "k2")}
    assert diff_ratio(s, s) == 0.0


def test_diff_ratio_hand_value():
    ref = {("q", "k%d" % i) for i in range(4)}
    got = ref | {("q", "n1"), ("q", "n2"), ("q", "n3")}
    assert diff_ratio(got, ref) == pytest.approx(3 / 4)


def test_diff_ratio_disjoint():
    assert diff_ratio({("a", "b")}, {("c", "d")}) == 1.0


def test_diff_ratio_empty_reference():
    with pytest.raises(EmptyReference):
        diff_ratio({("a", "b")}, set())


# --- bleu -------------------------------------------------------------------

def test_bleu_identical():
    assert bleu_n(["a", "b", "c"], ["a", "b", "c"], 2) == pytest.approx(1.0)


def test_bleu2_hand_value():
    # unigrams: 2 of 3 match, add-one -> 3/4; bigrams: 1 of 2, add-one -> 2/3
    want = math.sqrt((3 / 4) * (2 / 3))
    assert bleu_n(["a", "b", "c"], ["a", "b", "d"], 2) == \
        pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(0.7071067811865476, abs=1e-9)


def test_bleu1_disjoint_floor():
    cand = ["x", "y", "z"]
    assert bleu_n(cand, ["a", "b", "c"], 1) == pytest.approx(1 / (len(cand) + 1))


def test_bleu_brevity_penalty():
    # candidate shorter than reference, full unigram precision
    got = bleu_n(["a"], ["a", "b", "c"], 1)
    assert got == pytest.approx(math.exp(1 - 3 / 1) * (2 / 2))


def test_bleu_empty_candidate():
    with pytest.raises(EmptyCandidate):
        bleu_n([], ["a"], 1)


@given(st.lists(st.sampled_from("abc"), min_size=1, max_size=6),
       st.lists(st.sampled_from("abc"), max_size=6))
def test_bleu_bounded(cand, ref):
    for n in (1, 2):
        assert 0.0 <= bleu_n(cand, ref, n) <= 1.0


# --- dist-n -----------------------------------------------------------------

def test_dist1_hand_value():
    # tokens a,b,a,c -> 3 distinct of 4
    assert dist_n([["a", "b"], ["a", "c"]], 1) == pytest.approx(3 / 4)


def test_dist2_hand_value():
    corp = [["a", "b", "a"], ["a", "b"]]
    # bigrams: (a,b),(b,a),(a,b) -> 2 distinct of 3
    assert dist_n(corp, 2) == pytest.approx(2 / 3)


def test_dist_n_short_sequences():
    assert dist_n([["a"]], 2) == 0.0


def test_dist_n_empty_corpus():
    with pytest.raises(EmptyCorpus):
        dist_n([], 1)


# --- auc --------------------------------------------------------------------

def test_auc_hand_fixture():
    scored = [(0.9, 1), (0.4, 1), (0.6, 0), (0.1, 0)]
    assert auc(scored) == pytest.approx(0.75, abs=1e-12)


def test_auc_perfect_and_inverted():
    assert auc([(0.9, 1), (0.1, 0)]) == 1.0
    assert auc([(0.1, 1), (0.9, 0)]) == 0.0


def test_auc_ties_half_credit():
    assert auc([(0.5, 1), (0.5, 0)]) == 0.5


def test_auc_single_class():
    with pytest.raises(SingleClass):
        auc([(0.5, 1)])


def _trapezoid_roc_auc(scored):
    # classic ROC sweep, valid when all scores are distinct
    scored = sorted(scored, key=lambda e: -e[0])
    n_pos = sum(1 for _, y in scored if y == 1)
    n_neg = len(scored) - n_pos
    tp = fp = 0
    area = 0.0
    prev_fpr = prev_tpr = 0.0
    for _, y in scored:
        if y == 1:
            tp += 1
        else:
            fp += 1
        fpr, tpr = fp / n_neg, tp / n_pos
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0
        prev_fpr, prev_tpr = fpr, tpr
    return area


@pytest.mark.parametrize("seed", range(10))
def test_auc_matches_trapezoidal_roc(seed):
    rng = random.Random(seed)
    scores = rng.sample([i / 100 for i in range(100)], 20)  # distinct
    scored = [(s, rng.randint(0, 1)) for s in scores]
    labels = {y for _, y in scored}
    if labels != {0, 1}:
        scored[0] = (scored[0][0], 1)
        scored[1] = (scored[1][0], 0)
    assert auc(scored) == pytest.approx(_trapezoid_roc_auc(scored), abs=1e-9)


# --- recall at precision ----------------------------------------------------

FIXTURE = [(0.95, 1), (0.9, 1), (0.85, 0), (0.8, 1), (0.7, 1),
           (0.6, 0), (0.5, 1), (0.4, 0), (0.3, 0), (0.2, 1)]


def _oracle_recall(scored, p):
    best = 0.0
    n_pos = sum(1 for _, y in scored if y == 1)
    for threshold in {s for s, _ in scored}:
        kept = [y for s, y in scored if s >= threshold]
        tp = sum(kept)
        if kept and tp / len(kept) >= p:
            best = max(best, tp / n_pos)
    return best


@pytest.mark.parametrize("p", [0.5, 0.7, 0.8, 0.9, 0.95, 1.0])
def test_recall_matches_sweep_oracle(p):
    assert recall_at_precision(FIXTURE, p) == pytest.approx(_oracle_recall(FIXTURE, p))


def test_recall_non_increasing_in_precision():
    values = [recall_at_precision(FIXTURE, p) for p in (0.5, 0.8, 0.9, 0.95, 0.99)]
    for a, b in zip(values, values[1:]):
        assert b <= a


def test_recall_hand_values():
    assert recall_at_precision(FIXTURE, 1.0) == pytest.approx(2 / 6)
    assert recall_at_precision(FIXTURE, 0.5) == pytest.approx(1.0)


# --- online metrics ---------------------------------------------------------

def test_cpm_identity():
    m = online_metrics(searches=2000, clicks=90, revenue=135.0, shows=1800)
    assert m["cpm"] == pytest.approx(m["ctr"] * m["acp"] * 1000.0, abs=1e-9)
    assert m["cpm"] == pytest.approx(135.0 / 2000 * 1000.0, abs=1e-9)
    assert m["show"] == 1800
    assert not m["acp_flagged"]


def test_zero_clicks_flagged():
    m = online_metrics(searches=100, clicks=0, revenue=0.0)
    assert m["acp"] == 0.0 and m["cpm"] == 0.0 and m["acp_flagged"]


def test_zero_searches():
    with pytest.raises(ZeroSearches):
        online_metrics(0, 0, 0.0)


# --- precision sampling -----------------------------------------------------

def test_precision_sample_deterministic():
    pairs = [("q%d" % i, "k%d" % i) for i in range(50)]
    a = precision_sample(pairs, 10, seed=7)
    b = precision_sample(pairs, 10, seed=7)
    assert a == b and len(set(a)) == 10
    assert precision_sample(pairs, 10, seed=8) != a


def test_precision_sample_too_large():
    with pytest.raises(SampleTooLarge):
        precision_sample([("q", "k")], 2, seed=0)


def test_precision_from_labels():
    assert precision_from_labels([1, 1, 0, 1]) == pytest.approx(0.75)
    with pytest.raises(EmptyReference):
        precision_from_labels([])
