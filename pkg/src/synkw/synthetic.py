"""Seeded synthetic corpus for desk-scale experiments.

Keywords are generated as trivial variants of a shared core token set:
reorderings plus insertions of redundant-POS fillers, the patterns that
canonicalization is designed to collapse. A fraction of bases carries a
location pair whose order is meaningful and must never be collapsed.
"""

import random

from .text_core import AUXILIARY, INTERJECTION, MODAL, PUNCT

AUX_WORDS = ("generally", "probably", "basically", "roughly", "overall")
INTERJECTION_WORDS = ("hey", "hmm", "uh", "er")
MODAL_WORDS = ("wow", "yo", "yeah", "huh")
PUNCT_WORDS = ("?", ",", "!")
LOCATIONS = ("paris", "london", "berlin", "madrid", "oslo", "rome",
             "tokyo", "cairo", "lima", "quito")
DISEASES = ("flu", "asthma", "anemia", "ulcer", "gout", "angina")

_FILLERS = AUX_WORDS + INTERJECTION_WORDS + MODAL_WORDS
_CONSONANTS = "bcdfghjklmnpqrstvz"
_VOWELS = "aeiou"


def pos_lexicon_rows():
    rows = [(w, AUXILIARY) for w in AUX_WORDS]
    rows += [(w, INTERJECTION) for w in INTERJECTION_WORDS]
    rows += [(w, MODAL) for w in MODAL_WORDS]
    rows += [(w, PUNCT) for w in PUNCT_WORDS]
    return rows


def category_rows():
    return [(w, "LOCATION") for w in LOCATIONS] + [(w, "DISEASE") for w in DISEASES]


def _make_vocab(rng, size):
    taken = set(_FILLERS) | set(LOCATIONS) | set(DISEASES)
    vocab = []
    while len(vocab) < size:
        w = "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS)
                    for _ in range(rng.randint(2, 3)))
        # avoid words the greedy tokenizer would split on a filler prefix
        if w in taken or any(w.startswith(f) for f in _FILLERS):
            continue
        taken.add(w)
        vocab.append(w)
    return vocab


class Base:
    """One synonym group: a core token multiset, optionally with an ordered
    location suffix."""

    def __init__(self, core, location_pair=None):
        self.core = list(core)
        self.location_pair = list(location_pair) if location_pair else None

    def variant(self, rng, max_fillers=2):
        toks = self.core[:]
        rng.shuffle(toks)
        if self.location_pair:
            toks = toks + self.location_pair  # order carries meaning, keep it
        for _ in range(rng.randint(0, max_fillers)):
            toks.insert(rng.randint(0, len(toks)), rng.choice(_FILLERS))
        return " ".join(toks)


def make_bases(rng, n_bases, vocab, core_len=(3, 5), location_every=10):
    seen = set()
    bases = []
    while len(bases) < n_bases:
        core = rng.sample(vocab, rng.randint(*core_len))
        key = tuple(sorted(core))
        if key in seen:
            continue
        seen.add(key)
        loc = None
        if location_every and len(bases) % location_every == location_every - 1:
            loc = rng.sample(LOCATIONS, 2)
        bases.append(Base(core, loc))
    return bases


class SyntheticCorpus:
    def __init__(self, keywords, seed_pairs, queries, labeled_pairs):
        self.keywords = keywords        # list of strings
        self.seed_pairs = seed_pairs    # list of (query, keyword)
        self.queries = queries          # list of strings
        self.labeled_pairs = labeled_pairs  # list of (query, keyword, label)


def generate(n_bases=200, variants_per_base=5, queries_per_base=2,
             seed_pairs_per_base=2, n_labeled=400, vocab_size=400, seed=0):
    rng = random.Random(seed)
    vocab = _make_vocab(rng, vocab_size)
    bases = make_bases(rng, n_bases, vocab)

    keywords = []
    per_base_keywords = []
    for base in bases:
        ks = []
        attempts = 0
        while len(ks) < variants_per_base and attempts < variants_per_base * 20:
            v = base.variant(rng)
            attempts += 1
            if v not in ks:
                ks.append(v)
        per_base_keywords.append(ks)
        keywords.extend(ks)

    seed_pairs = []
    queries = []
    for base, ks in zip(bases, per_base_keywords):
        for _ in range(seed_pairs_per_base):
            q = base.variant(rng)
            for k in rng.sample(ks, min(2, len(ks))):
                seed_pairs.append((q, k))
        for _ in range(queries_per_base):
            queries.append(base.variant(rng))

    labeled = []
    for i in range(n_labeled):
        bi = rng.randrange(len(bases))
        if i % 2 == 0:
            labeled.append((bases[bi].variant(rng), bases[bi].variant(rng), 1))
        else:
            bj = (bi + rng.randrange(1, len(bases))) % len(bases)
            labeled.append((bases[bi].variant(rng), bases[bj].variant(rng), 0))

    return SyntheticCorpus(keywords, seed_pairs, queries, labeled)


def generate_injected_pairs(n_pairs=1000, injected_fraction=0.2,
                            vocab_size=600, seed=0):
    """Pair list where a known fraction are trivial variants of other pairs:
    identical canonical form on both sides, different surface strings."""
    rng = random.Random(seed)
    vocab = _make_vocab(rng, vocab_size)
    n_injected = round(n_pairs * injected_fraction)
    n_base = n_pairs - n_injected
    bases = make_bases(rng, n_base, vocab, location_every=0)

    base_pairs = [(b.variant(rng), b.variant(rng)) for b in bases]
    injected = []
    while len(injected) < n_injected:
        i = rng.randrange(n_base)
        b = bases[i]
        q, k = b.variant(rng), b.variant(rng)
        if (q, k) != base_pairs[i]:
            injected.append((q, k))
    pairs = base_pairs + injected
    rng.shuffle(pairs)
    return pairs
