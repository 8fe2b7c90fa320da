"""Flattening of trie + default model into the integer arrays the compiled
beam-search kernel consumes.

Token ids are assigned in sorted-surface order, so comparing id sequences is
the same as comparing surface sequences; the kernel's tie-breaking therefore
matches the pure backend exactly.
"""

import numpy as np

from . import _beam
from .translation import EOS, _rank_completed


class EncodedSearch:
    def __init__(self, trie, model):
        self.trie = trie
        self.model = model
        vocab = sorted(trie.vocabulary())
        self.vocab = vocab
        self.tid = {t: i for i, t in enumerate(vocab)}
        V = len(vocab)
        self.V = V
        self.bos_row = V + 1  # row V is the (empty) EOS row

        n = len(trie)
        child_start = np.zeros(n + 1, dtype=np.int64)
        toks, nodes = [], []
        for node in range(n):
            edges = trie.children(node)
            child_start[node + 1] = child_start[node] + len(edges)
            for tok, child in edges:
                toks.append(self.tid[tok])
                nodes.append(child)
        self.child_start = child_start
        self.child_tok = np.asarray(toks, dtype=np.int32)
        self.child_node = np.asarray(nodes, dtype=np.int32)
        self.terminal = np.asarray(
            [trie.is_terminal(i) for i in range(n)], dtype=np.uint8)

        lm = model.lm
        rows = V + 2
        lm_start = np.zeros(rows + 1, dtype=np.int64)
        lm_tok, lm_cnt = [], []
        eos_cnt = np.zeros(rows, dtype=np.float64)
        totals = np.zeros(rows, dtype=np.float64)
        from .translation import BOS
        histories = vocab + [EOS, BOS]
        for r, h in enumerate(histories):
            if r == V:  # EOS is never a history
                lm_start[r + 1] = lm_start[r]
                continue
            counts = lm.counts.get(h, {})
            totals[r] = lm.totals.get(h, 0)
            eos_cnt[r] = counts.get(EOS, 0)
            entries = sorted(
                (self.tid[t], c) for t, c in counts.items() if t in self.tid)
            lm_start[r + 1] = lm_start[r] + len(entries)
            for t, c in entries:
                lm_tok.append(t)
                lm_cnt.append(float(c))
        self.lm_start = lm_start
        self.lm_tok = np.asarray(lm_tok, dtype=np.int32)
        self.lm_cnt = np.asarray(lm_cnt, dtype=np.float64)
        self.eos_cnt = eos_cnt
        self.totals = totals
        self._lex_rows = {}

    def _lex_row(self, surface):
        cached = self._lex_rows.get(surface)
        if cached is None:
            row = self.model.lexical.row(surface)
            entries = sorted(
                (self.tid[t], p) for t, p in row.items() if t in self.tid)
            ids = np.asarray([i for i, _ in entries], dtype=np.int64)
            vals = np.asarray([p for _, p in entries], dtype=np.float64)
            cached = (ids, vals)
            self._lex_rows[surface] = cached
        return cached

    def _plex(self, source_tokens):
        n = max(len(source_tokens), 1)
        acc = np.zeros(self.V, dtype=np.float64)
        cnt = np.zeros(self.V, dtype=np.float64)
        for s in source_tokens:
            ids, vals = self._lex_row(s)
            np.add.at(acc, ids, vals)
            np.add.at(cnt, ids, 1.0)
        return (acc + (n - cnt) * self.model.eps_lex) / n

    def decode(self, source_tokens, cfg):
        if self.child_tok.size == 0 and not self.terminal.any():
            return []
        plex = self._plex(source_tokens)
        completed = _beam.decode(
            self.child_start, self.child_tok, self.child_node, self.terminal,
            self.lm_start, self.lm_tok, self.lm_cnt, self.eos_cnt, self.totals,
            float(self.model.lm.k), float(self.model.lm.outcomes), plex,
            float(self.model.alpha), float(self.model.eps_lex),
            cfg.beam_size, cfg.max_length, self.bos_row)
        ranked = _rank_completed(completed, cfg)
        vocab = self.vocab
        return [(tuple(vocab[t] for t in seq), score) for seq, score in ranked]
