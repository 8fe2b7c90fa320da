"""Query-keyword pair features, a logistic-regression scorer, an adapter for
externally produced scores and threshold filtering.

The feature set covers token-level matching only: longest common contiguous
token run, matching/missing token proportions, BM25 of the keyword treated
as a document, BLEU-1/2 against the query and an optional translation model
log-probability. Richer features (entities, parse kernels, embeddings) need
external models and are deliberately out of scope.
"""

import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (MissingScore, MissingStats, ParseError, ScoreOutOfRange,
                     SingleClassCorpus, SnapshotFormatError)
from .metrics import bleu_n
from .text_core import bcw, tokenize
from .translation import EOS

TRANSLATION_SENTINEL = -1e9

FEATURE_NAMES = ("max_match_len", "match_ratio", "miss_ratio", "bm25",
                 "bleu1", "bleu2", "translation_logprob")


class PairFeatures(NamedTuple):
    max_match_len: int
    match_ratio: float
    miss_ratio: float
    bm25: float
    bleu1: float
    bleu2: float
    translation_logprob: float

    def vector(self):
        return np.asarray(self, dtype=np.float64)


class LabeledPair(NamedTuple):
    query: str
    keyword: str
    label: int


class ScoredPair(NamedTuple):
    query: str
    keyword: str
    score: float


@dataclass
class CorpusStats:
    """Document frequencies and average length of the keyword repository,
    with the lexicons needed to tokenize incoming pairs."""
    df: Counter
    n_docs: int
    avgdl: float
    lexicon: object
    ordered_categories: dict
    k1: float = 1.2
    b: float = 0.75

    @classmethod
    def build(cls, keywords, lexicon, ordered_categories=None):
        df = Counter()
        n_docs, total_len = 0, 0
        for k in keywords:
            toks = tokenize(k, lexicon).surfaces()
            n_docs += 1
            total_len += len(toks)
            df.update(set(toks))
        if n_docs == 0:
            raise MissingStats("keyword repository is empty")
        return cls(df, n_docs, total_len / n_docs, lexicon,
                   ordered_categories or {})

    def idf(self, term):
        n = self.df.get(term, 0)
        return math.log(1.0 + (self.n_docs - n + 0.5) / (n + 0.5))

    def bm25(self, query_tokens, doc_tokens):
        tf = Counter(doc_tokens)
        dl = len(doc_tokens)
        norm = self.k1 * (1.0 - self.b + self.b * dl / self.avgdl) if self.avgdl else self.k1
        score = 0.0
        for t in query_tokens:
            f = tf.get(t, 0)
            if f:
                score += self.idf(t) * f * (self.k1 + 1.0) / (f + norm)
        return score


def _max_match_len(a, b):
    # longest common contiguous token run, O(|a||b|) DP
    best = 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, 1):
            if x == y:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best


def sequence_logprob(model, source, target_seq):
    """Sum of per-token model log-probabilities of the target path + EOS."""
    total = 0.0
    prefix = ()
    for tok in target_seq:
        total += model.next_token_logprobs(source, prefix, [tok])[tok]
        prefix = prefix + (tok,)
    total += model.next_token_logprobs(source, prefix, [EOS])[EOS]
    return total


def extract_features(query, keyword, corpus_stats, model=None):
    if corpus_stats is None:
        raise MissingStats("corpus stats are required")
    q = tokenize(query, corpus_stats.lexicon).surfaces()
    k = tokenize(keyword, corpus_stats.lexicon).surfaces()
    common = sum((Counter(q) & Counter(k)).values())
    match_ratio = common / len(q) if q else 0.0
    miss_ratio = 1.0 - (common / len(k) if k else 0.0)
    if model is not None:
        src = bcw(query, corpus_stats.lexicon, corpus_stats.ordered_categories)
        tgt = bcw(keyword, corpus_stats.lexicon, corpus_stats.ordered_categories)
        trans = sequence_logprob(model, src, tgt.seq)
    else:
        trans = TRANSLATION_SENTINEL
    return PairFeatures(
        max_match_len=_max_match_len(q, k),
        match_ratio=match_ratio,
        miss_ratio=miss_ratio,
        bm25=corpus_stats.bm25(q, k),
        bleu1=bleu_n(k, q, 1) if k else 0.0,
        bleu2=bleu_n(k, q, 2) if k else 0.0,
        translation_logprob=trans,
    )


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def loss_and_grad(w, b, X, y, l2=0.0):
    """Mean logistic loss with L2 on the weights, and its gradient."""
    z = X @ w + b
    p = _sigmoid(z)
    eps = 1e-12
    loss = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    loss += 0.5 * l2 * float(w @ w)
    grad_w = X.T @ (p - y) / len(y) + l2 * w
    grad_b = float(np.mean(p - y))
    return loss, grad_w, grad_b


@dataclass
class LinearClassifier:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray
    epochs: int = 0
    loss_history: tuple = ()

    def normalize(self, X):
        return (X - self.mean) / self.std

    def score_vector(self, x):
        xh = (np.asarray(x, dtype=np.float64) - self.mean) / self.std
        return float(_sigmoid(xh @ self.weights + self.bias))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("synkw-classifier\t1\n")
            fh.write("\t".join(FEATURE_NAMES) + "\n")
            for name, arr in (("mean", self.mean), ("std", self.std),
                              ("weights", self.weights)):
                fh.write(name + "\t" + "\t".join(repr(float(v)) for v in arr) + "\n")
            fh.write(f"bias\t{self.bias!r}\n")
            fh.write(f"epochs\t{self.epochs}\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines or not lines[0].startswith("synkw-classifier\t"):
            raise SnapshotFormatError(f"{path}: not a classifier snapshot")
        fields = {}
        for line in lines[2:]:
            parts = line.split("\t")
            fields[parts[0]] = parts[1:]
        return cls(
            weights=np.asarray([float(v) for v in fields["weights"]]),
            bias=float(fields["bias"][0]),
            mean=np.asarray([float(v) for v in fields["mean"]]),
            std=np.asarray([float(v) for v in fields["std"]]),
            epochs=int(fields["epochs"][0]),
        )


def train_classifier(data, features_fn, epochs=300, learning_rate=0.5, l2=1e-4):
    """Full-batch gradient descent on z-scored features."""
    labels = {d.label for d in data}
    if labels != {0, 1}:
        raise SingleClassCorpus("training data must contain both classes")
    X = np.stack([features_fn(d.query, d.keyword).vector() for d in data])
    y = np.asarray([d.label for d in data], dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0  # constant features stay at zero after centering
    Xh = (X - mean) / std
    w = np.zeros(X.shape[1])
    b = 0.0
    losses = []
    for _ in range(epochs):
        loss, gw, gb = loss_and_grad(w, b, Xh, y, l2)
        losses.append(loss)
        w -= learning_rate * gw
        b -= learning_rate * gb
    return LinearClassifier(w, b, mean, std, epochs, tuple(losses))


def score(classifier, pair, features_fn):
    query, keyword = pair[0], pair[1]
    return classifier.score_vector(features_fn(query, keyword).vector())


class ExternalScores(dict):
    """(query, keyword) -> score parsed from TSV; duplicate keys keep the
    last value and are counted."""

    def __init__(self):
        super().__init__()
        self.duplicates = 0


def load_external_scores(path):
    scores = ExternalScores()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(path, line_no, f"expected 3 fields, got {len(parts)}")
            try:
                value = float(parts[2])
            except ValueError:
                raise ParseError(path, line_no, f"bad score {parts[2]!r}") from None
            if not 0.0 <= value <= 1.0:
                raise ScoreOutOfRange(f"{path}:{line_no}: score {value} outside [0, 1]")
            key = (parts[0], parts[1])
            if key in scores:
                scores.duplicates += 1
            scores[key] = value
    return scores


def filter_pairs(pairs, score_source, threshold):
    """Retain pairs whose score >= threshold, keeping input order.

    `score_source` is either a mapping (query, keyword) -> score or a
    callable taking (query, keyword).
    """
    get = score_source if callable(score_source) else None
    retained = []
    for pair in pairs:
        key = (pair[0], pair[1])
        if get is not None:
            s = get(*key)
        else:
            s = score_source.get(key)
            if s is None:
                raise MissingScore(f"no score for pair {key!r}")
        if s >= threshold:
            retained.append(pair)
    return retained


def load_labeled_pairs(path):
    """TSV `query<TAB>keyword<TAB>label(0|1)`."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2] not in ("0", "1"):
                raise ParseError(path, line_no, f"expected `query\\tkeyword\\t0|1`, got {line!r}")
            out.append(LabeledPair(parts[0], parts[1], int(parts[2])))
    return out
