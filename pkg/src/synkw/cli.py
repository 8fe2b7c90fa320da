"""Batch command line for refreshing the offline synonym lookup table.

Subcommands: gen-synthetic, build, retrieve, filter, train-filter, eval.
Every command writes a manifest (input hashes, config echo, counts, timing)
next to its outputs. Exit codes: 0 success, 2 input error, 3 invariant
violation.
"""

import argparse
import hashlib
import json
import os
import shutil
import sys
import time

from . import discriminant, metrics, pipeline, synthetic, text_core
from .errors import InvariantViolation, SynkwError
from .pipeline import AugmentConfig, Lexicons, PairDataset
from .translation import load_model, save_model
from .trie import KeywordTrie


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir, command, config, inputs, outputs, timing_ms):
    manifest = {
        "command": command,
        "config": config,
        "inputs": {p: _sha256(p) for p in inputs},
        "outputs": outputs,
        "timing_ms": timing_ms,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    return path


def _load_config_file(args):
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            return json.load(fh)
    return {}


def _opt(args, file_cfg, name, default):
    """Effective option value: CLI flag wins over config file over default."""
    flag = getattr(args, name.replace("-", "_"), None)
    if flag is not None:
        return flag
    if name in file_cfg:
        return file_cfg[name]
    return default


def _load_lexicons(pos_path, ordered_path):
    pos = text_core.load_pos_lexicon(pos_path)
    cats = text_core.load_category_lexicon(ordered_path) if ordered_path else {}
    return Lexicons(pos, cats)


def _augment_config(args, file_cfg):
    return AugmentConfig(
        beam_size=int(_opt(args, file_cfg, "beam", 30)),
        strategy=_opt(args, file_cfg, "strategy", "BCW"),
        max_length=int(_opt(args, file_cfg, "max-length", 20)),
        alpha=float(_opt(args, file_cfg, "alpha", 0.5)),
        eps_lex=float(_opt(args, file_cfg, "eps-lex", 1e-6)),
        em_iterations=int(_opt(args, file_cfg, "em-iterations", 5)),
        lm_k=float(_opt(args, file_cfg, "lm-k", 0.1)),
        workers=int(_opt(args, file_cfg, "workers", 1)),
    )


def cmd_gen_synthetic(args):
    out = args.out
    os.makedirs(out, exist_ok=True)
    corpus = synthetic.generate(
        n_bases=args.bases, variants_per_base=args.variants,
        queries_per_base=args.queries_per_base, n_labeled=args.labeled,
        vocab_size=args.vocab_size, seed=args.seed)

    def write(name, lines):
        path = os.path.join(out, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line + "\n")
        return path

    t0 = time.perf_counter()
    write("pos_lexicon.tsv", [f"{w}\t{t}" for w, t in synthetic.pos_lexicon_rows()])
    write("ordered_categories.tsv", [f"{w}\t{c}" for w, c in synthetic.category_rows()])
    write("keywords.txt", corpus.keywords)
    write("queries.txt", corpus.queries)
    write("seed_pairs.tsv", [f"{q}\t{k}" for q, k in corpus.seed_pairs])
    write("labeled_pairs.tsv", [f"{q}\t{k}\t{y}" for q, k, y in corpus.labeled_pairs])
    cfg_echo = {k: v for k, v in vars(args).items()
                if k not in ("func", "command")}
    _write_manifest(out, "gen-synthetic", cfg_echo, [], {
        "keywords": len(corpus.keywords),
        "queries": len(corpus.queries),
        "seed_pairs": len(corpus.seed_pairs),
        "labeled_pairs": len(corpus.labeled_pairs),
    }, (time.perf_counter() - t0) * 1000.0)
    return 0


def cmd_build(args):
    file_cfg = _load_config_file(args)
    cfg = _augment_config(args, file_cfg)
    seed_pairs = _opt(args, file_cfg, "seed-pairs", None)
    keywords_path = _opt(args, file_cfg, "keywords", None)
    pos_path = _opt(args, file_cfg, "pos-lexicon", None)
    ordered_path = _opt(args, file_cfg, "ordered-lexicon", None)
    for name, p in (("seed-pairs", seed_pairs), ("keywords", keywords_path),
                    ("pos-lexicon", pos_path)):
        if not p:
            raise SynkwError(f"--{name} is required")
    lexicons = _load_lexicons(pos_path, ordered_path)
    d_old = PairDataset.load(seed_pairs)
    keywords = pipeline.load_lines(keywords_path)

    t0 = time.perf_counter()
    trie, inverse, model = pipeline.build_artifacts(d_old, keywords, cfg, lexicons)
    elapsed = (time.perf_counter() - t0) * 1000.0

    out = args.out
    os.makedirs(out, exist_ok=True)
    trie.save(os.path.join(out, "trie.bin"))
    save_model(model, os.path.join(out, "model.txt"))
    pipeline.save_inverse(inverse, os.path.join(out, "inverse.tsv"))
    shutil.copyfile(pos_path, os.path.join(out, "pos_lexicon.tsv"))
    if ordered_path:
        shutil.copyfile(ordered_path, os.path.join(out, "ordered_categories.tsv"))
    meta = {
        "strategy": cfg.strategy, "beam": cfg.beam_size,
        "max_length": cfg.max_length, "alpha": cfg.alpha,
        "eps_lex": cfg.eps_lex, "em_iterations": cfg.em_iterations,
        "lm_k": cfg.lm_k, "has_ordered_lexicon": bool(ordered_path),
    }
    with open(os.path.join(out, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    inputs = [seed_pairs, keywords_path, pos_path] + ([ordered_path] if ordered_path else [])
    _write_manifest(out, "build", meta, inputs, {
        "trie_nodes": len(trie),
        "trie_paths": trie.path_count,
        "inverse_keys": len(inverse),
        "seed_pairs": d_old.pair_count,
        "keywords": len(keywords),
    }, elapsed)
    return 0


def cmd_retrieve(args):
    art = args.artifacts
    with open(os.path.join(art, "config.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    cfg = AugmentConfig(
        beam_size=args.beam or meta["beam"], strategy=meta["strategy"],
        max_length=meta["max_length"], alpha=meta["alpha"],
        eps_lex=meta["eps_lex"], em_iterations=meta["em_iterations"],
        lm_k=meta["lm_k"], workers=args.workers)
    ordered = os.path.join(art, "ordered_categories.tsv")
    lexicons = _load_lexicons(
        os.path.join(art, "pos_lexicon.tsv"),
        ordered if meta.get("has_ordered_lexicon") else None)
    trie = KeywordTrie.load(os.path.join(art, "trie.bin"))
    model = load_model(os.path.join(art, "model.txt"))
    inverse = pipeline.load_inverse(os.path.join(art, "inverse.tsv"))
    d_old = PairDataset.load(args.seed_pairs)
    queries = pipeline.load_lines(args.queries) if os.path.getsize(args.queries) else []

    result = pipeline.retrieve_stage(d_old, trie, inverse, model, queries, cfg, lexicons)

    if args.verify_membership:
        repo = set(pipeline.load_lines(args.verify_membership))
        for q, k in result.delta.pairs():
            if k not in repo:
                raise InvariantViolation(
                    f"retrieved keyword not in repository: {k!r} (query {q!r})")

    out = args.out
    os.makedirs(out, exist_ok=True)
    result.d_new.save(os.path.join(out, "d_new.tsv"))
    result.delta.save(os.path.join(out, "delta.tsv"))
    _write_manifest(out, "retrieve", {**meta, "beam": cfg.beam_size,
                                      "workers": cfg.workers},
                    [args.seed_pairs, args.queries], {
        "queries": len(queries),
        "decoded": result.decoded_queries,
        "skipped_queries": result.skipped_queries,
        "d_new_pairs": result.d_new.pair_count,
        "delta_pairs": result.delta.pair_count,
        "diff_ratio": (result.delta.pair_count / d_old.pair_count
                       if d_old.pair_count else 0.0),
    }, result.decode_ms_per_query * max(result.decoded_queries, 1))
    print(f"decoded {result.decoded_queries} queries, "
          f"{result.decode_ms_per_query:.2f} ms/query, "
          f"delta {result.delta.pair_count} pairs")
    return 0


def _classifier_scorer(args):
    clf = discriminant.LinearClassifier.load(args.classifier)
    lexicons = _load_lexicons(args.pos_lexicon, args.ordered_lexicon)
    keywords = pipeline.load_lines(args.keywords)
    stats = discriminant.CorpusStats.build(keywords, lexicons.pos,
                                           lexicons.ordered_categories)

    def scorer(q, k):
        return clf.score_vector(
            discriminant.extract_features(q, k, stats).vector())
    return scorer


def cmd_filter(args):
    d_delta = PairDataset.load(args.delta)
    if args.scores:
        source = discriminant.load_external_scores(args.scores)
        inputs = [args.delta, args.scores]
    elif args.classifier:
        source = _classifier_scorer(args)
        inputs = [args.delta, args.classifier, args.keywords, args.pos_lexicon]
    else:
        raise SynkwError("either --scores or --classifier is required")
    t0 = time.perf_counter()
    filtered = pipeline.run_filter_stage(d_delta, source, args.tau)
    elapsed = (time.perf_counter() - t0) * 1000.0
    out = args.out
    os.makedirs(out, exist_ok=True)
    filtered.save(os.path.join(out, "filtered.tsv"))
    _write_manifest(out, "filter", {"tau": args.tau}, inputs, {
        "input_pairs": d_delta.pair_count,
        "retained_pairs": filtered.pair_count,
    }, elapsed)
    print(f"retained {filtered.pair_count}/{d_delta.pair_count} pairs at tau={args.tau}")
    return 0


def cmd_train_filter(args):
    data = discriminant.load_labeled_pairs(args.labeled)
    lexicons = _load_lexicons(args.pos_lexicon, args.ordered_lexicon)
    keywords = pipeline.load_lines(args.keywords)
    stats = discriminant.CorpusStats.build(keywords, lexicons.pos,
                                           lexicons.ordered_categories)

    def features(q, k):
        return discriminant.extract_features(q, k, stats)

    t0 = time.perf_counter()
    clf = discriminant.train_classifier(data, features, epochs=args.epochs,
                                        learning_rate=args.lr)
    elapsed = (time.perf_counter() - t0) * 1000.0
    out = args.out
    os.makedirs(out, exist_ok=True)
    clf.save(os.path.join(out, "classifier.txt"))
    scored = [(discriminant.score(clf, (d.query, d.keyword), features), d.label)
              for d in data]
    _write_manifest(out, "train-filter", {"epochs": args.epochs, "lr": args.lr},
                    [args.labeled, args.keywords, args.pos_lexicon], {
        "examples": len(data),
        "final_loss": clf.loss_history[-1],
        "train_auc": metrics.auc(scored),
    }, elapsed)
    print(f"trained on {len(data)} pairs, final loss {clf.loss_history[-1]:.4f}")
    return 0


def cmd_eval(args):
    lexicon = text_core.load_pos_lexicon(args.pos_lexicon)
    generated = PairDataset.load(args.generated)
    reference = PairDataset.load(args.reference)
    report = {"diff_ratio": metrics.diff_ratio(generated, reference)}

    toks = {}

    def tok(s):
        if s not in toks:
            toks[s] = text_core.tokenize(s, lexicon).surfaces()
        return toks[s]

    pairs = generated.sorted_pairs()
    if pairs:
        bleus = [metrics.bleu_n(tok(k), tok(q), 2) for q, k in pairs if tok(k)]
        report["bleu2"] = sum(bleus) / len(bleus) if bleus else 0.0
        gen_tokens = [tok(k) for _, k in pairs]
        report["dist1"] = metrics.dist_n(gen_tokens, 1)
        report["dist2"] = metrics.dist_n(gen_tokens, 2)
        report["pair_count"] = len(pairs)

    if args.scored:
        scored = []
        with open(args.scored, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line:
                    parts = line.split("\t")
                    scored.append((float(parts[2]), int(parts[3])))
        report["auc"] = metrics.auc(scored)
        report["recall_at_95p"] = metrics.recall_at_precision(scored, 0.95)
        report["scored_pairs"] = len(scored)

    out = args.out
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    inputs = [args.generated, args.reference, args.pos_lexicon]
    if args.scored:
        inputs.append(args.scored)
    _write_manifest(out, "eval", {}, inputs, report, 0.0)
    width = max(len(k) for k in report)
    for k in sorted(report):
        v = report[k]
        print(f"{k:<{width}}  {v:.6f}" if isinstance(v, float) else f"{k:<{width}}  {v}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="synkw",
                                description="synonymous keyword retrieval pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-synthetic", help="emit a synthetic corpus")
    g.add_argument("--out", required=True)
    g.add_argument("--bases", type=int, default=200)
    g.add_argument("--variants", type=int, default=5)
    g.add_argument("--queries-per-base", type=int, default=2)
    g.add_argument("--labeled", type=int, default=400)
    g.add_argument("--vocab-size", type=int, default=400)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen_synthetic)

    b = sub.add_parser("build", help="build trie, inverse table and model snapshots")
    b.add_argument("--config")
    b.add_argument("--seed-pairs")
    b.add_argument("--keywords")
    b.add_argument("--pos-lexicon")
    b.add_argument("--ordered-lexicon")
    b.add_argument("--strategy", choices=pipeline.STRATEGIES)
    b.add_argument("--beam", type=int)
    b.add_argument("--max-length", type=int)
    b.add_argument("--alpha", type=float)
    b.add_argument("--eps-lex", type=float)
    b.add_argument("--em-iterations", type=int)
    b.add_argument("--lm-k", type=float)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    r = sub.add_parser("retrieve", help="decode queries against built artifacts")
    r.add_argument("--artifacts", required=True)
    r.add_argument("--seed-pairs", required=True)
    r.add_argument("--queries", required=True)
    r.add_argument("--beam", type=int)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--verify-membership", metavar="KEYWORDS_FILE")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_retrieve)

    f = sub.add_parser("filter", help="threshold-filter an increment")
    f.add_argument("--delta", required=True)
    f.add_argument("--scores")
    f.add_argument("--classifier")
    f.add_argument("--keywords")
    f.add_argument("--pos-lexicon")
    f.add_argument("--ordered-lexicon")
    f.add_argument("--tau", type=float, default=0.5)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_filter)

    t = sub.add_parser("train-filter", help="train the logistic pair scorer")
    t.add_argument("--labeled", required=True)
    t.add_argument("--keywords", required=True)
    t.add_argument("--pos-lexicon", required=True)
    t.add_argument("--ordered-lexicon")
    t.add_argument("--epochs", type=int, default=300)
    t.add_argument("--lr", type=float, default=0.5)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train_filter)

    e = sub.add_parser("eval", help="metric report for a generated dataset")
    e.add_argument("--generated", required=True)
    e.add_argument("--reference", required=True)
    e.add_argument("--pos-lexicon", required=True)
    e.add_argument("--scored", help="TSV query\\tkeyword\\tscore\\tlabel")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except (SynkwError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
