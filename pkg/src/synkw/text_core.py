"""Tokenization, lexicon-driven POS tagging and bag-of-core-words canonicalization.

A sentence is reduced to a canonical key in two steps: drop tokens whose POS
tag is redundant (interjections, auxiliaries, punctuation, modal particles),
then sort the surviving tokens by codepoint. Tokens from an ordered category
(locations, diseases, ...) are exempt from sorting when the same category
occurs at least twice in the sentence, so "flights new-york to beijing" and
its reversal keep distinct keys.
"""

import unicodedata
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ParseError, ReservedSeparator

# POS tags used by the artifact. Lexicons may introduce further tags; only
# membership in the redundant set matters for core-word filtering.
CONTENT = "CONTENT"
PUNCT = "PUNCT"
INTERJECTION = "INTERJECTION"
AUXILIARY = "AUXILIARY"
MODAL = "MODAL"

DEFAULT_REDUNDANT = frozenset({INTERJECTION, AUXILIARY, PUNCT, MODAL})

FREE_SEP = "|"
ORDERED_SEP = "‖"
RESERVED = (FREE_SEP, ORDERED_SEP)


class Token(NamedTuple):
    surface: str
    pos: str


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    raw: str

    def surfaces(self):
        return [t.surface for t in self.tokens]

    def __len__(self):
        return len(self.tokens)


@dataclass(frozen=True)
class PosLexicon:
    entries: dict  # normalized surface -> POS tag
    max_len: int

    def get(self, surface, default=None):
        return self.entries.get(surface, default)


@dataclass(frozen=True)
class CanonicalForm:
    free: tuple     # sorted ascending by codepoint, multiplicity kept
    ordered: tuple  # original relative order

    @property
    def rendered(self):
        if self.ordered:
            return FREE_SEP.join(self.free) + ORDERED_SEP + FREE_SEP.join(self.ordered)
        return FREE_SEP.join(self.free)

    @property
    def seq(self):
        """Token sequence used for trie paths; the ordered block is preceded
        by the ORDERED_SEP marker so the key stays recoverable from the path."""
        if self.ordered:
            return tuple(self.free) + (ORDERED_SEP,) + tuple(self.ordered)
        return tuple(self.free)

    def source_tokens(self):
        return list(self.free) + list(self.ordered)


def render_seq(seq):
    """Inverse of CanonicalForm.seq for arbitrary decoded paths."""
    seq = list(seq)
    if ORDERED_SEP in seq:
        i = seq.index(ORDERED_SEP)
        return FREE_SEP.join(seq[:i]) + ORDERED_SEP + FREE_SEP.join(seq[i + 1:])
    return FREE_SEP.join(seq)


def normalize(raw):
    return unicodedata.normalize("NFKC", raw).lower()


def _check_reserved(surface, origin):
    for sep in RESERVED:
        if sep in surface:
            raise ReservedSeparator(f"{origin}: {surface!r} contains reserved separator {sep!r}")


def _is_cjk(ch):
    cp = ord(ch)
    return (
        0x4E00 <= cp <= 0x9FFF
        or 0x3400 <= cp <= 0x4DBF
        or 0xF900 <= cp <= 0xFAFF
        or 0x20000 <= cp <= 0x2FA1F
    )


def _is_punct(ch):
    return unicodedata.category(ch)[0] in ("P", "S")


def tokenize(raw, lexicon):
    """Greedy longest-match segmentation against the POS lexicon.

    Unmatched CJK codepoints become single-codepoint CONTENT tokens;
    unmatched alphanumeric runs are taken whole up to the next whitespace,
    punctuation or CJK boundary. Whitespace only separates.
    """
    text = normalize(raw)
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        matched = False
        for length in range(min(lexicon.max_len, n - i), 0, -1):
            cand = text[i:i + length]
            tag = lexicon.get(cand)
            if tag is not None:
                tokens.append(Token(cand, tag))
                i += length
                matched = True
                break
        if matched:
            continue
        if _is_cjk(ch):
            tokens.append(Token(ch, CONTENT))
            i += 1
        elif _is_punct(ch):
            tokens.append(Token(ch, PUNCT))
            i += 1
        else:
            j = i
            while j < n and text[j].isalnum() and not _is_cjk(text[j]):
                j += 1
            if j == i:  # control chars etc.
                j = i + 1
            tokens.append(Token(text[i:j], CONTENT))
            i = j
    return Sentence(tuple(tokens), raw)


def core_words(s, redundant=DEFAULT_REDUNDANT):
    """Drop redundant-POS tokens, keeping survivor order."""
    return Sentence(tuple(t for t in s.tokens if t.pos not in redundant), s.raw)


def canonicalize(s, ordered_categories=None):
    """Split a core-word sentence into sorted free tokens and order-kept
    exempt tokens. A token is exempt only when its category occurs >= 2
    times in the sentence; a lone category member sorts into `free`.
    """
    ordered_categories = ordered_categories or {}
    cats = [ordered_categories.get(t.surface) for t in s.tokens]
    counts = {}
    for c in cats:
        if c is not None:
            counts[c] = counts.get(c, 0) + 1
    free, ordered = [], []
    for t, c in zip(s.tokens, cats):
        if c is not None and counts[c] >= 2:
            ordered.append(t.surface)
        else:
            free.append(t.surface)
    return CanonicalForm(tuple(sorted(free)), tuple(ordered))


def bcw(raw, lexicon, ordered_categories=None, redundant=DEFAULT_REDUNDANT):
    """Full canonicalization: tokenize, drop redundant POS, sort with exemptions."""
    return canonicalize(core_words(tokenize(raw, lexicon), redundant), ordered_categories)


@dataclass(frozen=True)
class InverseTable:
    map: dict  # rendered key -> set of original keyword strings

    def __len__(self):
        return len(self.map)


def build_inverse_table(keywords, lexicon, ordered_categories=None,
                        redundant=DEFAULT_REDUNDANT):
    table = {}
    for k in keywords:
        key = bcw(k, lexicon, ordered_categories, redundant).rendered
        table.setdefault(key, set()).add(k)
    return InverseTable(table)


def inverse_bcw(forms, table):
    """Union of the table entries for the given canonical forms (or rendered
    keys); absent keys contribute nothing."""
    out = set()
    for f in forms:
        key = f.rendered if isinstance(f, CanonicalForm) else f
        out |= table.map.get(key, set())
    return out


def load_pos_lexicon(path):
    """UTF-8 TSV `surface<TAB>TAG`; surfaces normalized, separators rejected."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                _malformed(path, line_no, line)
            surface = normalize(parts[0])
            _check_reserved(surface, f"{path}:{line_no}")
            entries[surface] = parts[1]
    max_len = max((len(s) for s in entries), default=1)
    return PosLexicon(entries, max_len)


def _malformed(path, line_no, line):
    raise ParseError(path, line_no, f"expected two tab-separated fields, got {line!r}")


def load_category_lexicon(path):
    """UTF-8 TSV `surface<TAB>CATEGORY` -> dict surface -> category."""
    cats = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                _malformed(path, line_no, line)
            surface = normalize(parts[0])
            _check_reserved(surface, f"{path}:{line_no}")
            cats[surface] = parts[1]
    return cats
