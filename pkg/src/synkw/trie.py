"""Word-level prefix tree over canonicalized keyword token sequences.

The trie is the structural constraint for decoding: at every step the legal
continuations of a hypothesis are exactly the children of its current node,
plus end-of-sequence when the node is terminal. Nodes live in an arena and
children are kept sorted by token surface so iteration order (and therefore
beam tie-breaking) is deterministic.
"""

import io
import struct

from .errors import EmptySequence, SnapshotFormatError, UnknownNode

_MAGIC = b"SKTR"
_VERSION = 1


class KeywordTrie:
    def __init__(self):
        self._children = [{}]  # node id -> {token surface: child id}
        self._terminal = [False]
        self.root = 0
        self.path_count = 0
        self._sorted = [None]  # lazily sorted child lists

    def __len__(self):
        return len(self._children)

    def insert(self, sequence):
        if not sequence:
            raise EmptySequence("cannot insert an empty token sequence")
        node = self.root
        for tok in sequence:
            nxt = self._children[node].get(tok)
            if nxt is None:
                nxt = len(self._children)
                self._children[node][tok] = nxt
                self._children.append({})
                self._terminal.append(False)
                self._sorted.append(None)
            self._sorted[node] = None
            node = nxt
        if not self._terminal[node]:
            self._terminal[node] = True
            self.path_count += 1

    def _check(self, node):
        if not isinstance(node, int) or not 0 <= node < len(self._children):
            raise UnknownNode(f"no such node: {node!r}")

    def children(self, node):
        """Sorted (token, child id) pairs of a node."""
        self._check(node)
        cached = self._sorted[node]
        if cached is None:
            cached = sorted(self._children[node].items())
            self._sorted[node] = cached
        return cached

    def is_terminal(self, node):
        self._check(node)
        return self._terminal[node]

    def valid_next(self, node):
        """All legal continuation tokens plus whether EOS is allowed here."""
        return [tok for tok, _ in self.children(node)], self.is_terminal(node)

    def child(self, node, tok):
        self._check(node)
        return self._children[node].get(tok)

    def contains(self, sequence):
        node = self.root
        for tok in sequence:
            node = self._children[node].get(tok)
            if node is None:
                return False
        return self._terminal[node]

    def iter_paths(self):
        """Yield every terminal root-path in sorted token order."""
        stack = [(self.root, ())]
        while stack:
            node, path = stack.pop()
            if self._terminal[node]:
                yield path
            for tok, child in reversed(self.children(node)):
                stack.append((child, path + (tok,)))

    def vocabulary(self):
        vocab = set()
        for edges in self._children:
            vocab.update(edges)
        return vocab

    # --- binary snapshot -------------------------------------------------

    def save(self, path):
        with open(path, "wb") as fh:
            self._write(fh)

    def _write(self, fh):
        vocab = sorted(self.vocabulary())
        tok_id = {t: i for i, t in enumerate(vocab)}
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", _VERSION, len(self._children), len(vocab)))
        blob = "\n".join(vocab).encode("utf-8")
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for node in range(len(self._children)):
            edges = self.children(node)
            fh.write(struct.pack("<I?", len(edges), self._terminal[node]))
            for tok, child in edges:
                fh.write(struct.pack("<II", tok_id[tok], child))

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls._read(fh)

    @classmethod
    def _read(cls, fh):
        if fh.read(4) != _MAGIC:
            raise SnapshotFormatError("bad trie snapshot magic")
        version, n_nodes, n_vocab = struct.unpack("<III", fh.read(12))
        if version != _VERSION:
            raise SnapshotFormatError(f"unsupported trie snapshot version {version}")
        (blob_len,) = struct.unpack("<I", fh.read(4))
        blob = fh.read(blob_len).decode("utf-8")
        vocab = blob.split("\n") if n_vocab else []
        if len(vocab) != n_vocab:
            raise SnapshotFormatError("vocabulary block truncated")
        trie = cls()
        trie._children = [{} for _ in range(n_nodes)]
        trie._terminal = [False] * n_nodes
        trie._sorted = [None] * n_nodes
        trie.path_count = 0
        for node in range(n_nodes):
            n_edges, terminal = struct.unpack("<I?", fh.read(5))
            trie._terminal[node] = terminal
            if terminal:
                trie.path_count += 1
            for _ in range(n_edges):
                tid, child = struct.unpack("<II", fh.read(8))
                trie._children[node][vocab[tid]] = child
        return trie

    def to_bytes(self):
        buf = io.BytesIO()
        self._write(buf)
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, blob):
        return cls._read(io.BytesIO(blob))


def build_trie(sequences):
    """Insert every sequence; duplicate inserts are idempotent."""
    trie = KeywordTrie()
    for seq in sequences:
        trie.insert(seq)
    return trie
