"""Compare the compiled beam-search kernel against the pure-Python search.

Builds a 10,000-keyword synthetic repository, trains the default model and
times decoding at beam size 30 on both backends.

Usage: python3 benchmarks/bench_decode.py [n_queries]
"""

import sys
import time

from synkw import synthetic, text_core
from synkw.pipeline import (AugmentConfig, Lexicons, PairDataset,
                            build_artifacts, transform)
from synkw.translation import HAVE_KERNEL, BeamConfig, Decoder


def main(n_queries=200):
    corpus = synthetic.generate(n_bases=2000, variants_per_base=5,
                                vocab_size=900, seed=42)
    pos = text_core.PosLexicon(dict(synthetic.pos_lexicon_rows()),
                               max(len(w) for w, _ in synthetic.pos_lexicon_rows()))
    lexicons = Lexicons(pos, dict(synthetic.category_rows()))
    d_old = PairDataset.from_pairs(corpus.seed_pairs)
    cfg = AugmentConfig(beam_size=30, strategy="BCW")

    print(f"keywords: {len(corpus.keywords)}, seed pairs: {d_old.pair_count}")
    t0 = time.perf_counter()
    trie, inverse, model = build_artifacts(d_old, corpus.keywords, cfg, lexicons)
    print(f"build: {time.perf_counter() - t0:.1f}s "
          f"(trie: {len(trie)} nodes, {trie.path_count} paths)")

    queries = corpus.queries[:n_queries]
    sources = [list(transform(q, cfg.strategy, lexicons)) for q in queries]
    beam_cfg = BeamConfig(30, 20)

    backends = [("pure", False)]
    if HAVE_KERNEL:
        backends.insert(0, ("compiled", True))
    else:
        print("compiled kernel not available; benchmarking pure backend only")

    results = {}
    for name, use_kernel in backends:
        decoder = Decoder(trie, model, use_kernel=use_kernel)
        t0 = time.perf_counter()
        out = [decoder.decode(src, beam_cfg) for src in sources]
        dt = time.perf_counter() - t0
        results[name] = out
        print(f"{name:>9}: {len(queries) / dt:8.1f} queries/s "
              f"({dt * 1000 / len(queries):6.2f} ms/query)")

    if len(results) == 2:
        same = all(a == b for a, b in zip(results["compiled"], results["pure"]))
        print(f"backends agree on all {len(queries)} queries: {same}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200)
