"""Evaluation metrics: diff ratio, BLEU-n, Dist-n, AUC, recall at a
precision target, seeded precision sampling and the online traffic formulas.

AUC is computed by exact positive/negative pair counting (ties get half
credit); there is no approximation anywhere in this module.
"""

import math
import random
from collections import Counter

from .errors import (EmptyCandidate, EmptyCorpus, EmptyReference, SampleTooLarge,
                     SingleClass, ZeroSearches)


def diff_ratio(d1, d_test):
    """|pairs(d1) - pairs(d_test)| / |pairs(d_test)|."""
    ref = d_test.pairs() if hasattr(d_test, "pairs") else set(d_test)
    got = d1.pairs() if hasattr(d1, "pairs") else set(d1)
    if not ref:
        raise EmptyReference("reference pair set is empty")
    return len(got - ref) / len(ref)


def _ngrams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def bleu_n(candidate, reference, n=2):
    """Geometric mean of add-one smoothed modified n-gram precisions times
    the brevity penalty."""
    if n not in (1, 2):
        raise ValueError("only BLEU-1 and BLEU-2 are supported")
    candidate, reference = list(candidate), list(reference)
    if not candidate:
        raise EmptyCandidate("empty candidate")
    log_p = 0.0
    for order in range(1, n + 1):
        cand = Counter(_ngrams(candidate, order))
        ref = Counter(_ngrams(reference, order))
        matches = sum(min(c, ref[g]) for g, c in cand.items())
        total = sum(cand.values())
        log_p += math.log((matches + 1) / (total + 1))
    bp = 1.0 if len(candidate) >= len(reference) else \
        math.exp(1.0 - len(reference) / len(candidate))
    return bp * math.exp(log_p / n)


def dist_n(corpus, n):
    """Distinct n-grams over total n-grams across the whole corpus."""
    total, distinct = 0, set()
    nonempty = False
    for tokens in corpus:
        nonempty = True
        grams = _ngrams(list(tokens), n)
        total += len(grams)
        distinct.update(grams)
    if not nonempty:
        raise EmptyCorpus("empty corpus")
    if total == 0:
        return 0.0
    return len(distinct) / total


def _split_classes(scored):
    pos = [s for s, label in scored if label == 1]
    neg = [s for s, label in scored if label == 0]
    if not pos or not neg:
        raise SingleClass("need both positive and negative examples")
    return pos, neg


def auc(scored):
    """Exact Mann-Whitney pair counting; ties count one half.

    `scored` is an iterable of (score, label) with label in {0, 1}.
    """
    pos, neg = _split_classes(list(scored))
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def recall_at_precision(scored, p=0.95):
    """Max recall over score thresholds whose retained-set precision >= p."""
    scored = list(scored)
    pos, _ = _split_classes(scored)
    n_pos = len(pos)
    best = 0.0
    for threshold in sorted({s for s, _ in scored}, reverse=True):
        retained = [(s, y) for s, y in scored if s >= threshold]
        tp = sum(1 for _, y in retained if y == 1)
        if tp / len(retained) >= p:
            best = max(best, tp / n_pos)
    return best


def online_metrics(searches, clicks, revenue, shows=0):
    """SHOW, CTR, ACP and CPM from aggregate traffic counters.

    CPM = revenue / searches * 1000 = CTR * ACP * 1000; with zero clicks
    ACP is reported as 0 and flagged.
    """
    if searches <= 0:
        raise ZeroSearches("searches must be positive")
    if clicks < 0:
        raise ValueError("clicks must be >= 0")
    ctr = clicks / searches
    acp = revenue / clicks if clicks else 0.0
    cpm = revenue / searches * 1000.0
    return {"show": shows, "ctr": ctr, "acp": acp, "cpm": cpm,
            "acp_flagged": clicks == 0}


def precision_sample(pairs, sample_size, seed):
    """Seeded uniform sample without replacement, for human labeling."""
    pairs = list(pairs)
    if sample_size > len(pairs):
        raise SampleTooLarge(f"sample {sample_size} > population {len(pairs)}")
    return random.Random(seed).sample(pairs, sample_size)


def precision_from_labels(labels):
    labels = list(labels)
    if not labels:
        raise EmptyReference("no labels")
    return sum(1 for y in labels if y == 1) / len(labels)
