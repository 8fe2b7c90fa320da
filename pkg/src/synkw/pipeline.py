"""End-to-end augmentation: canonicalize the seed pairs, train the scorer,
decode every frequent query against the keyword trie, join back to verbatim
keywords and merge the result into an expanded dataset.

Three strategies are supported: BASE (no transformation), CW (redundant-POS
removal only) and BCW (removal plus sorting with ordered-category
exemptions). The trie, the inverse lookup table and the training data are
all built in the strategy's transformed space.
"""

import time
from dataclasses import dataclass, field

from . import text_core
from .discriminant import filter_pairs
from .errors import EmptyCorpus, ParseError, SynkwError
from .text_core import (DEFAULT_REDUNDANT, bcw, core_words, render_seq, tokenize)
from .translation import (BeamConfig, Decoder, DefaultScoringModel,
                          train_bigram_lm, train_lexical_table)
from .trie import build_trie

STRATEGIES = ("BASE", "CW", "BCW")


class PairDataset:
    """query -> set of keywords, with no duplicate pairs."""

    def __init__(self, mapping=None):
        self.map = {}
        if mapping:
            for q, ks in mapping.items():
                self.map[q] = set(ks)

    @property
    def pair_count(self):
        return sum(len(ks) for ks in self.map.values())

    def add(self, query, keyword):
        self.map.setdefault(query, set()).add(keyword)

    def keywords_for(self, query):
        return self.map.get(query, set())

    def queries(self):
        return self.map.keys()

    def pairs(self):
        return {(q, k) for q, ks in self.map.items() for k in ks}

    def sorted_pairs(self):
        return sorted(self.pairs())

    def copy(self):
        return PairDataset(self.map)

    def __contains__(self, pair):
        q, k = pair
        return k in self.map.get(q, ())

    def __len__(self):
        return self.pair_count

    def __eq__(self, other):
        return isinstance(other, PairDataset) and self.map == other.map

    @classmethod
    def from_pairs(cls, pairs):
        d = cls()
        for q, k in pairs:
            d.add(q, k)
        return d

    @classmethod
    def load(cls, path):
        """TSV `query<TAB>keyword`, one pair per line."""
        d = cls()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise ParseError(path, line_no, f"expected `query\\tkeyword`, got {line!r}")
                d.add(parts[0], parts[1])
        return d

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for q, k in self.sorted_pairs():
                fh.write(f"{q}\t{k}\n")


def delta(d_new, d_old):
    """Per-query set difference d_new - d_old."""
    out = PairDataset()
    for q, ks in d_new.map.items():
        extra = ks - d_old.keywords_for(q)
        if extra:
            out.map[q] = set(extra)
    return out


@dataclass
class Lexicons:
    pos: object
    ordered_categories: dict = field(default_factory=dict)
    redundant: frozenset = DEFAULT_REDUNDANT


def transform(raw, strategy, lexicons):
    """Strategy-transformed token sequence of a raw string (may be empty)."""
    if strategy == "BASE":
        return tuple(tokenize(raw, lexicons.pos).surfaces())
    if strategy == "CW":
        s = core_words(tokenize(raw, lexicons.pos), lexicons.redundant)
        return tuple(s.surfaces())
    if strategy == "BCW":
        return bcw(raw, lexicons.pos, lexicons.ordered_categories,
                   lexicons.redundant).seq
    raise ValueError(f"unknown strategy {strategy!r}")


def transform_key(raw, strategy, lexicons):
    return render_seq(transform(raw, strategy, lexicons))


@dataclass
class AugmentConfig:
    beam_size: int = 30
    strategy: str = "BCW"
    max_length: int = 20
    alpha: float = 0.5
    eps_lex: float = 1e-6
    em_iterations: int = 5
    lm_k: float = 0.1
    use_kernel: bool = None
    workers: int = 1

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.beam_size < 1:
            raise ValueError("beam size must be >= 1")


@dataclass
class AugmentResult:
    d_new: PairDataset
    delta: PairDataset
    skipped_queries: int
    decode_ms_per_query: float
    decoded_queries: int


def build_artifacts(d_old, keywords, cfg, lexicons):
    """Trie + inverse table over transformed keywords and the scoring model
    trained on the transformed seed pairs."""
    inverse = {}
    sequences = []
    for k in keywords:
        seq = transform(k, cfg.strategy, lexicons)
        if not seq:
            continue
        sequences.append(seq)
        inverse.setdefault(render_seq(seq), set()).add(k)
    trie = build_trie(sequences)

    pairs = []
    targets = []
    for q, ks in d_old.map.items():
        src = list(transform(q, cfg.strategy, lexicons))
        for k in ks:
            tgt = list(transform(k, cfg.strategy, lexicons))
            if not src or not tgt:
                continue
            pairs.append((src, tgt))
            targets.append(tgt)
    if not pairs:
        raise EmptyCorpus("no usable training pairs after transformation")
    lexical = train_lexical_table(pairs, cfg.em_iterations)
    lm = train_bigram_lm(targets, cfg.lm_k)
    model = DefaultScoringModel(lexical, lm, cfg.alpha, cfg.eps_lex)
    return trie, text_core.InverseTable(inverse), model


def retrieve_for_query(query, decoder, inverse, cfg, lexicons, beam_cfg):
    """Decode one query and join the results back to verbatim keywords."""
    src = transform(query, cfg.strategy, lexicons)
    if not src:
        return None
    results = decoder.decode(list(src), beam_cfg)
    keys = {render_seq(seq) for seq, _ in results}
    return text_core.inverse_bcw(keys, inverse)


_POOL_STATE = {}


def _pool_work(query):
    decoder, inverse, cfg, lexicons, beam_cfg = _POOL_STATE["args"]
    return retrieve_for_query(query, decoder, inverse, cfg, lexicons, beam_cfg)


def augment(d_old, keywords, queries, cfg, lexicons):
    """Run the full retrieval stage; returns the expanded dataset plus the
    increment. Every keyword in the increment is a verbatim member of the
    repository by construction (trie membership + inverse join)."""
    if not d_old.map:
        raise EmptyCorpus("seed dataset is empty")
    keywords = list(keywords)
    if not keywords:
        raise EmptyCorpus("keyword repository is empty")
    trie, inverse, model = build_artifacts(d_old, keywords, cfg, lexicons)
    return retrieve_stage(d_old, trie, inverse, model, queries, cfg, lexicons)


def retrieve_stage(d_old, trie, inverse, model, queries, cfg, lexicons):
    """Decode every query against prebuilt artifacts and merge into a copy
    of the seed dataset."""
    decoder = Decoder(trie, model, cfg.use_kernel)
    beam_cfg = BeamConfig(cfg.beam_size, cfg.max_length)

    d_new = d_old.copy()
    skipped = 0
    queries = list(queries)
    t0 = time.perf_counter()
    if cfg.workers > 1:
        import multiprocessing as mp
        # fork start method: workers inherit the decoder without pickling
        _POOL_STATE["args"] = (decoder, inverse, cfg, lexicons, beam_cfg)
        ctx = mp.get_context("fork")
        with ctx.Pool(cfg.workers) as pool:
            all_results = pool.map(_pool_work, queries, chunksize=64)
        _POOL_STATE.clear()
    else:
        all_results = [retrieve_for_query(q, decoder, inverse, cfg, lexicons, beam_cfg)
                       for q in queries]
    elapsed = time.perf_counter() - t0
    for q, retrieved in zip(queries, all_results):
        if retrieved is None:
            skipped += 1
            continue
        for k in retrieved:
            d_new.add(q, k)
    decoded = len(queries) - skipped
    ms = elapsed * 1000.0 / decoded if decoded else 0.0
    return AugmentResult(d_new, delta(d_new, d_old), skipped, ms, decoded)


def run_filter_stage(delta_ds, score_source, threshold):
    """Apply discriminant filtering to the increment only; the seed data is
    trusted and never re-scored."""
    kept = filter_pairs(delta_ds.sorted_pairs(), score_source, threshold)
    return PairDataset.from_pairs(kept)


def save_inverse(inverse, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(inverse.map):
            for k in sorted(inverse.map[key]):
                fh.write(f"{key}\t{k}\n")


def load_inverse(path):
    table = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(path, line_no, f"expected `key\\tkeyword`, got {line!r}")
            table.setdefault(parts[0], set()).add(parts[1])
    return text_core.InverseTable(table)


def load_lines(path):
    """One string per line; reserved key separators are rejected."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            for sep in text_core.RESERVED:
                if sep in line:
                    raise SynkwError(f"{path}:{line_no}: reserved separator {sep!r} in input")
            out.append(line)
    return out
