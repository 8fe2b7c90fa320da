"""Scoring model and trie-constrained beam search.

The scorer contract is a next-token log-probability function given a source
form and a decoded prefix. The default desk-scale model mixes an EM-trained
lexical translation table with an add-k bigram language model:

    score(t | source, prefix) = log(a * p_lm(t | last) + (1-a) * p_lex(t | source))

Beam search is constrained to a keyword trie: the candidate continuations of
a hypothesis are exactly the trie children of its node, plus EOS when the
node is terminal, so every emitted sequence is a repository path.

A compiled extension (synkw._beam) accelerates decoding with the default
model; it is selected at import time and falls back to the pure-Python
search transparently.
"""

import math
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyCorpus
from .text_core import CanonicalForm

BOS = "\x02"
EOS = "\x03"

try:
    from . import _beam as _kernel
except ImportError:  # extension not built; pure-Python fallback
    _kernel = None

HAVE_KERNEL = _kernel is not None


@dataclass
class BeamConfig:
    beam_size: int
    max_length: int = 20
    length_normalize: bool = False  # off by default; changes final ranking only

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam size must be >= 1")
        if self.max_length < 1:
            raise ValueError("max length must be >= 1")


class LexicalTable:
    """p(target token | source token), EM-trained in the style of IBM Model 1."""

    def __init__(self, probs, likelihoods=()):
        self.probs = probs  # source -> {target: prob}
        self.likelihoods = list(likelihoods)  # corpus log-likelihood per EM iteration

    def prob(self, target, source, default=0.0):
        return self.probs.get(source, {}).get(target, default)

    def row(self, source):
        return self.probs.get(source, {})


def train_lexical_table(pairs, em_iterations=5):
    """EM with a uniform alignment prior; rows stay normalized per source."""
    if not pairs:
        raise EmptyCorpus("no training pairs")
    if em_iterations < 1:
        raise ValueError("em_iterations must be >= 1")
    cooc = {}
    for src, tgt in pairs:
        for s in src:
            cooc.setdefault(s, set()).update(tgt)
    probs = {s: {t: 1.0 / len(ts) for t in sorted(ts)} for s, ts in cooc.items()}
    likelihoods = []
    for _ in range(em_iterations):
        counts = {s: dict.fromkeys(row, 0.0) for s, row in probs.items()}
        ll = 0.0
        for src, tgt in pairs:
            if not src:
                continue
            inv_n = 1.0 / len(src)
            for t in tgt:
                denom = sum(probs[s].get(t, 0.0) for s in src)
                if denom <= 0.0:
                    continue
                ll += math.log(denom * inv_n)
                for s in src:
                    p = probs[s].get(t, 0.0)
                    if p > 0.0:
                        counts[s][t] += p / denom
        likelihoods.append(ll)
        for s, row in counts.items():
            total = sum(row.values())
            if total > 0.0:
                probs[s] = {t: c / total for t, c in row.items()}
    return LexicalTable(probs, likelihoods)


class BigramLM:
    """Add-k smoothed bigram model over the observed target vocabulary + EOS."""

    def __init__(self, counts, totals, vocab, k):
        self.counts = counts  # history -> {token: count}
        self.totals = totals  # history -> total count
        self.vocab = vocab    # observed target tokens (EOS excluded)
        self.k = k

    @property
    def outcomes(self):
        return len(self.vocab) + 1  # + EOS

    def prob(self, token, history):
        cnt = self.counts.get(history, {}).get(token, 0)
        total = self.totals.get(history, 0)
        return (cnt + self.k) / (total + self.k * self.outcomes)


def train_bigram_lm(targets, k=0.1):
    if not targets:
        raise EmptyCorpus("no target sentences")
    if k <= 0:
        raise ValueError("smoothing k must be > 0")
    counts, totals = {}, Counter()
    vocab = set()
    for seq in targets:
        h = BOS
        for t in list(seq) + [EOS]:
            counts.setdefault(h, Counter())[t] += 1
            totals[h] += 1
            h = t
        vocab.update(seq)
    return BigramLM(counts, dict(totals), vocab, k)


def _source_tokens(source):
    if isinstance(source, CanonicalForm):
        return source.source_tokens()
    return list(source)


class DefaultScoringModel:
    """Mixture of bigram LM and mean lexical translation probability.

    The lexical term averages p(t|s) over the source tokens, with a floor
    eps_lex for out-of-table entries; EOS takes the floor as its lexical
    term so the LM alone decides termination.
    """

    def __init__(self, lexical, lm, alpha=0.5, eps_lex=1e-6):
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        self.lexical = lexical
        self.lm = lm
        self.alpha = alpha
        self.eps_lex = eps_lex
        self._mixture_cache = {}

    def _lex_prob(self, token, rows, n):
        # accumulation order mirrors the compiled kernel so both backends
        # produce identical doubles
        acc, present = 0.0, 0
        for row in rows:
            p = row.get(token)
            if p is not None:
                acc += p
                present += 1
        return (acc + float(n - present) * self.eps_lex) / n

    def next_token_logprobs(self, source, prefix, candidates):
        src = _source_tokens(source)
        key = tuple(src)
        rows = self._mixture_cache.get(key)
        if rows is None:
            rows = [self.lexical.row(s) for s in src]
            self._mixture_cache[key] = rows
        n = max(len(src), 1)
        h = prefix[-1] if prefix else BOS
        out = {}
        for cand in candidates:
            p_lm = self.lm.prob(cand, h)
            if cand == EOS:
                p_lex = self.eps_lex
            else:
                p_lex = self._lex_prob(cand, rows, n)
            out[cand] = math.log(self.alpha * p_lm + (1.0 - self.alpha) * p_lex)
        return out


def constrained_beam_search(source, trie, model, cfg):
    """Pure-Python reference search; works with any ScoringModel.

    Candidate continuations at each step are exactly the trie children of
    the hypothesis node (EOS only at terminal nodes), so every result is a
    terminal trie path. Ties break lexicographically on the token sequence.
    """
    live = [(0.0, (), trie.root)]
    completed = []
    for _ in range(cfg.max_length + 1):
        if not live:
            break
        expansions = []
        seen_nodes = {}
        for score, seq, node in live:
            toks, may_end = trie.valid_next(node)
            cands = list(toks)
            if may_end:
                cands.append(EOS)
            if not cands:
                continue
            logps = model.next_token_logprobs(source, seq, cands)
            if may_end:
                completed.append((score + logps[EOS], seq))
            if len(seq) < cfg.max_length:
                for tok in toks:
                    child = trie.child(node, tok)
                    expansions.append((score + logps[tok], seq + (tok,), child))
        # recombination: a trie is a tree, so each node is reached by one
        # path only; keep the guard for safety
        expansions.sort(key=lambda e: (-e[0], e[1]))
        live = []
        for e in expansions:
            if e[2] in seen_nodes:
                continue
            seen_nodes[e[2]] = True
            live.append(e)
            if len(live) == cfg.beam_size:
                break
    return _rank_completed(completed, cfg)


def _rank_completed(completed, cfg):
    if cfg.length_normalize:
        ranked = sorted(completed, key=lambda c: (-c[0] / max(len(c[1]), 1), c[1]))
    else:
        ranked = sorted(completed, key=lambda c: (-c[0], c[1]))
    return [(seq, score) for score, seq in ranked[:cfg.beam_size]]


def _esc(token):
    return token.encode("unicode_escape").decode("ascii")


def _unesc(text):
    return text.encode("ascii").decode("unicode_escape")


def save_model(model, path):
    """Versioned text snapshot: lexical probabilities plus raw LM counts.

    Floats are written with repr() so loading reproduces identical scores.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("synkw-model\t1\n")
        fh.write(f"alpha\t{model.alpha!r}\n")
        fh.write(f"eps_lex\t{model.eps_lex!r}\n")
        fh.write(f"lm_k\t{model.lm.k!r}\n")
        for t in sorted(model.lm.vocab):
            fh.write(f"V\t{_esc(t)}\n")
        for s in sorted(model.lexical.probs):
            for t, p in sorted(model.lexical.probs[s].items()):
                fh.write(f"L\t{_esc(s)}\t{_esc(t)}\t{p!r}\n")
        for h in sorted(model.lm.counts):
            for t, c in sorted(model.lm.counts[h].items()):
                fh.write(f"B\t{_esc(h)}\t{_esc(t)}\t{c}\n")


def load_model(path):
    from .errors import SnapshotFormatError
    alpha = eps_lex = lm_k = None
    vocab = set()
    probs = {}
    counts = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "synkw-model\t1":
            raise SnapshotFormatError(f"{path}: not a model snapshot")
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            tag = parts[0]
            if tag == "alpha":
                alpha = float(parts[1])
            elif tag == "eps_lex":
                eps_lex = float(parts[1])
            elif tag == "lm_k":
                lm_k = float(parts[1])
            elif tag == "V":
                vocab.add(_unesc(parts[1]))
            elif tag == "L":
                probs.setdefault(_unesc(parts[1]), {})[_unesc(parts[2])] = float(parts[3])
            elif tag == "B":
                counts.setdefault(_unesc(parts[1]), Counter())[_unesc(parts[2])] = int(parts[3])
            else:
                raise SnapshotFormatError(f"{path}: unknown record {tag!r}")
    if None in (alpha, eps_lex, lm_k):
        raise SnapshotFormatError(f"{path}: incomplete header")
    totals = {h: sum(row.values()) for h, row in counts.items()}
    lm = BigramLM(counts, totals, vocab, lm_k)
    return DefaultScoringModel(LexicalTable(probs), lm, alpha, eps_lex)


class Decoder:
    """Trie + model bound together; picks the compiled kernel when it applies."""

    def __init__(self, trie, model, use_kernel=None):
        self.trie = trie
        self.model = model
        want = HAVE_KERNEL if use_kernel is None else (use_kernel and HAVE_KERNEL)
        if want and isinstance(model, DefaultScoringModel):
            from ._encode import EncodedSearch
            self._encoded = EncodedSearch(trie, model)
            self.backend = "compiled"
        else:
            self._encoded = None
            self.backend = "pure"

    def decode(self, source, cfg):
        if self._encoded is not None:
            return self._encoded.decode(_source_tokens(source), cfg)
        return constrained_beam_search(source, self.trie, self.model, cfg)
