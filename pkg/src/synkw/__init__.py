"""Synonymous keyword retrieval: canonicalization, trie-constrained
translation decoding, discriminant filtering and evaluation metrics."""

from .translation import HAVE_KERNEL

__all__ = ["HAVE_KERNEL"]
__version__ = "0.1.0"
