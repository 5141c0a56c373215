"""Command-line entry point.

Subcommands: stats, vocab build, synth generate, align fit|apply, train,
evaluate, predict, protocol. Each result-producing command reads an
optional JSON config file (flags override file values) and writes a
manifest with the resolved configuration into its output directory before
any results. Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .align import (fit_cca, load_lexicon, lexicon_matrices, project_corpus,
                    save_cca, load_cca, project)
from .corpus import parse_corpus, compute_stats
from .embeddings import build_matrix, load_vectors, save_vectors
from .errors import DataError, NumericError
from .metrics import accuracy, macro_f1, write_report, write_per_class
from .models import ModelConfig, save_checkpoint, \
    load_checkpoint, predict_dialogue
from .synthgen import SynthSpec, generate
from .train import (TrainConfig, train, evaluate_model, run_protocol,
                    pooled_tag_set, write_training_log)
from .vocab import build_vocab, build_union_vocab, save_vocab, load_vocab, \
    encode
from .corpus import window


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _write_manifest(out_dir: Path, command: str, config: dict) -> None:
    """Record the resolved configuration before any results are written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "dialact",
        "version": __version__,
        "command": command,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "argv": sys.argv[1:],
        "config": config,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# -- subcommand handlers ------------------------------------------------------

def cmd_stats(args) -> int:
    corpus = parse_corpus(args.corpus)
    stats = compute_stats(corpus)
    print(f"dialogue# = {stats.dialogue_count}")
    print(f"DA# = {stats.da_count}")
    print(f"word# = {stats.word_count}")
    for tag in corpus.tag_set:
        print(f"tag {tag} = {stats.tag_histogram[tag]}")
    return 0


def cmd_vocab_build(args) -> int:
    corpora = [parse_corpus(p) for p in args.corpus]
    if len(corpora) == 1:
        vocab = build_vocab(corpora[0], args.cap)
    else:
        vocab = build_union_vocab(corpora, args.cap)
    save_vocab(vocab, args.out)
    print(f"wrote {len(vocab)} entries to {args.out}")
    return 0


def cmd_synth_generate(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    if "transition" in config and config["transition"] is not None:
        config["transition"] = np.array(config["transition"])
    config["ambiguity"] = tuple(
        tuple(p) for p in config.get("ambiguity", ()))
    out = Path(args.out)
    _write_manifest(out, "synth generate",
                    {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                     for k, v in config.items()})
    data = generate(SynthSpec(**config))
    data.save(out)
    print(f"wrote synthetic corpora to {out}")
    return 0


def cmd_align_fit(args) -> int:
    src = load_vectors(args.src_vectors)
    piv = load_vectors(args.piv_vectors)
    lexicon = load_lexicon(args.lexicon)
    if args.swap_lexicon:
        lexicon = lexicon.swapped()
    x, y = lexicon_matrices(lexicon, src, piv)
    model = fit_cca(x, y, ridge=args.ridge, d=args.directions)
    save_cca(model, args.out)
    print(f"fit CCA on {x.shape[0]} pairs; "
          f"top correlation {model.correlations[0]:.4f}; wrote {args.out}")
    return 0


def cmd_align_apply(args) -> int:
    model = load_cca(args.model)
    vectors = load_vectors(args.vectors)
    projected = {t: project(model, v) for t, v in vectors.items()}
    save_vectors(projected, args.out)
    print(f"projected {len(projected)} vectors to {args.out}")
    return 0


def _train_config_from(config: dict) -> TrainConfig:
    kwargs = {}
    for name in ("learning_rate", "beta1", "beta2", "eps", "batch_size",
                 "epochs", "holdout"):
        if name in config:
            kwargs[name] = config[name]
    if "seeds" in config:
        kwargs["seeds"] = tuple(config["seeds"])
    return TrainConfig(**kwargs)


def _prepare_vocab_emb(config: dict, corpora):
    """Vocabulary (built or loaded) plus the embedding matrix."""
    cap = config.get("cap", 10000)
    if config.get("vocab"):
        vocab = load_vocab(config["vocab"])
    elif len(corpora) == 1:
        vocab = build_vocab(corpora[0], cap)
    else:
        vocab = build_union_vocab(corpora, cap)
    vectors = load_vectors(config["vectors"]) if config.get("vectors") else {}
    emb = build_matrix(vocab, vectors, dim=config.get("emb_dim", 300),
                       trainable=config.get("embedding_mode",
                                            "static") == "trainable",
                       seed=config.get("emb_seed", 0))
    return vocab, emb


def _apply_overrides(config: dict, args) -> dict:
    for key, value in (("arch", args.arch),
                       ("out", getattr(args, "out", None))):
        if value is not None:
            config[key] = value
    if args.history is not None:
        config["history"] = args.history == "on"
    if args.embeddings is not None:
        config["embedding_mode"] = args.embeddings
    if getattr(args, "seeds", None):
        config["seeds"] = [int(s) for s in args.seeds.split(",")]
    if getattr(args, "train_langs", None):
        config["train_langs"] = args.train_langs.split(",")
    if getattr(args, "test_lang", None):
        config["test_lang"] = args.test_lang
    return config


def cmd_train(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    out = Path(config.get("out", "out"))
    _write_manifest(out, "train", config)
    corpora = [parse_corpus(p) for p in config["train_corpora"]]
    vocab, emb = _prepare_vocab_emb(config, corpora)
    tag_set = pooled_tag_set(corpora)
    model_config = ModelConfig(
        architecture=config.get("arch", "bilstm"),
        tag_count=len(tag_set),
        window=config.get("window", 15),
        emb_dim=config.get("emb_dim", 300),
        use_history=config.get("history", False),
        embedding_mode=config.get("embedding_mode", "static"),
        seed=config.get("seed", 0))
    result = train(model_config, corpora, vocab, emb,
                   _train_config_from(config), tag_set=tag_set)
    save_vocab(vocab, out / "vocab.txt")
    save_checkpoint(result.model, out / "model.npz", tag_set=result.tag_set)
    write_training_log(result.log, out / "training_log.csv")
    last = result.log[-1]
    print(f"trained {model_config.architecture}: final loss {last.loss:.4f}, "
          f"train accuracy {last.train_accuracy:.4f}")
    return 0


def _load_eval_side(args, model):
    """Model checkpoint, test corpus, and the encoding-side vocab/matrix."""
    test_corpus = parse_corpus(args.test)
    vocab = load_vocab(args.vocab)
    test_emb = None
    if args.test_vectors:
        if args.test_vocab is None:
            raise DataError("--test-vectors requires --test-vocab")
        vocab = load_vocab(args.test_vocab)
        vectors = load_vectors(args.test_vectors)
        test_emb = build_matrix(vocab, vectors, dim=model.config.emb_dim,
                                seed=0)
    return test_corpus, vocab, test_emb


def cmd_evaluate(args) -> int:
    model, tag_set = load_checkpoint(args.model)
    test_corpus, vocab, test_emb = _load_eval_side(args, model)
    out = Path(args.out)
    _write_manifest(out, "evaluate", {"model": args.model, "test": args.test})
    acc, f1, gold, pred = evaluate_model(model, test_corpus, vocab, tag_set,
                                         test_emb=test_emb)
    eval_tags = tuple(sorted(set(tag_set) | set(gold)))
    write_per_class(gold, pred, eval_tags, out / "per_class.csv")
    with open(out / "metrics.csv", "w", encoding="utf-8") as fh:
        fh.write("accuracy,macro_f1\n")
        fh.write(f"{acc!r},{f1!r}\n")
    print(f"accuracy = {acc:.4f}")
    print(f"macro_f1 = {f1:.4f}")
    return 0


def cmd_predict(args) -> int:
    model, tag_set = load_checkpoint(args.model)
    test_corpus, vocab, test_emb = _load_eval_side(args, model)
    if test_emb is not None:
        model.set_embedding_matrix(test_emb)
    out = Path(args.out)
    _write_manifest(out, "predict", {"model": args.model, "test": args.test})
    with open(out / "predictions.tsv", "w", encoding="utf-8") as fh:
        for d in test_corpus.dialogues:
            ids = [np.array(encode(vocab, window(u.tokens,
                                                 model.config.window)))
                   for u in d.utterances]
            preds = predict_dialogue(model, ids)
            for turn, (u, pred) in enumerate(zip(d.utterances, preds)):
                fh.write(f"{d.id}\t{turn}\t{u.da_tag}\t{tag_set[pred]}\n")
    print(f"wrote {out / 'predictions.tsv'}")
    return 0


def _protocol_language(config: dict, name: str):
    lang = config[name]
    return {
        "name": lang.get("name", name),
        "train": parse_corpus(lang["train"]),
        "test": parse_corpus(lang["test"]),
        "vectors": load_vectors(lang["vectors"]) if lang.get("vectors")
        else {},
    }


def _make_emb(vocab, vectors, config):
    return build_matrix(vocab, vectors, dim=config.get("emb_dim", 300),
                        trainable=config.get("embedding_mode",
                                             "static") == "trainable",
                        seed=config.get("emb_seed", 0))


def cmd_protocol(args) -> int:
    """The full multi-seed grid: the multi-lingual table (4 configuration
    rows) and the cross-lingual table (2 rows), 12 metric columns each."""
    config = _apply_overrides(_load_config(args.config), args)
    out = Path(config.get("out", "out"))
    _write_manifest(out, "protocol", config)
    l1 = _protocol_language(config, "l1")
    l2 = _protocol_language(config, "l2")
    cap = config.get("cap", 10000)
    train_cfg = _train_config_from(config)
    archs = config.get("architectures", ["cnn1", "cnn2", "bilstm"])
    tables = config.get("tables", ["multi", "cross"])

    runs_path = out / "protocol_runs.csv"
    runs_fh = open(runs_path, "w", encoding="utf-8")
    runs_fh.write("train,test,architecture,history,seed,accuracy,macro_f1\n")

    def run_cell(train_label, test_label, arch, hist, train_corpora,
                 test_corpus, vocab, emb, test_vocab=None, test_emb=None):
        model_config = ModelConfig(
            architecture=arch, tag_count=len(pooled_tag_set(train_corpora)),
            window=config.get("window", 15),
            emb_dim=config.get("emb_dim", 300), use_history=hist,
            embedding_mode=config.get("embedding_mode", "static"))
        result = run_protocol(model_config, train_corpora, test_corpus,
                              vocab, emb, train_cfg, test_vocab=test_vocab,
                              test_emb=test_emb)
        for seed, acc, f1 in result.per_seed:
            runs_fh.write(f"{train_label},{test_label},{arch},"
                          f"{'on' if hist else 'off'},{seed},"
                          f"{acc!r},{f1!r}\n")
        runs_fh.write(f"{train_label},{test_label},{arch},"
                      f"{'on' if hist else 'off'},mean,"
                      f"{result.mean_accuracy!r},{result.mean_f1!r}\n")
        runs_fh.write(f"{train_label},{test_label},{arch},"
                      f"{'on' if hist else 'off'},std,"
                      f"{result.std_accuracy!r},{result.std_f1!r}\n")
        return result.mean_accuracy, result.mean_f1

    if "multi" in tables:
        n1, n2 = l1["name"], l2["name"]
        grid = [
            (n1, n1, [l1], l1["test"]),
            (n2, n2, [l2], l2["test"]),
            (f"{n1}+{n2}", n2, [l1, l2], l2["test"]),
            (f"{n1}+{n2}", n1, [l1, l2], l1["test"]),
        ]
        rows = []
        for train_label, test_label, langs, test_corpus in grid:
            corpora = [lang["train"] for lang in langs]
            if len(corpora) == 1:
                vocab = build_vocab(corpora[0], cap)
                vectors = langs[0]["vectors"]
            else:
                vocab = build_union_vocab(corpora, cap)
                vectors = {**langs[0]["vectors"], **langs[1]["vectors"]}
            emb = _make_emb(vocab, vectors, config)
            metrics = {}
            for arch in archs:
                for hist in (True, False):
                    metrics[(arch, hist)] = run_cell(
                        train_label, test_label, arch, hist, corpora,
                        test_corpus, vocab, emb)
            rows.append({"train": train_label, "test": test_label,
                         "metrics": metrics})
        write_report(rows, out / "multi.csv")

    if "cross" in tables:
        lexicon = load_lexicon(config["lexicon"])  # pairs (l1 tok, l2 tok)
        rows = []
        for pivot, source, lex in ((l1, l2, lexicon.swapped()),
                                   (l2, l1, lexicon)):
            pivot_vocab = build_vocab(pivot["train"], cap)
            pivot_emb = _make_emb(pivot_vocab, pivot["vectors"], config)
            src_vocab = build_vocab(source["train"], cap)
            src_emb = _make_emb(src_vocab, source["vectors"], config)
            x, y = lexicon_matrices(lex, source["vectors"], pivot["vectors"])
            cca = fit_cca(x, y, ridge=config.get("ridge"))
            projected = project_corpus(cca, src_emb)
            metrics = {}
            for arch in archs:
                for hist in (True, False):
                    metrics[(arch, hist)] = run_cell(
                        pivot["name"], source["name"], arch, hist,
                        [pivot["train"]], source["test"], pivot_vocab,
                        pivot_emb, test_vocab=src_vocab, test_emb=projected)
            rows.append({"train": pivot["name"], "test": source["name"],
                         "metrics": metrics})
        write_report(rows, out / "cross.csv")

    runs_fh.close()
    print(f"protocol results written to {out}")
    return 0


# -- parser -------------------------------------------------------------------

def _add_common_flags(p, seeds=False):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--arch", choices=["cnn1", "cnn2", "bilstm"])
    p.add_argument("--history", choices=["on", "off"])
    p.add_argument("--embeddings", choices=["static", "trainable"],
                   dest="embeddings")
    p.add_argument("--train-langs", dest="train_langs")
    p.add_argument("--test-lang", dest="test_lang")
    if seeds:
        p.add_argument("--seeds", help="comma-separated seed list")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dialact",
                     description="Multi-lingual dialogue act recognition")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("vocab", help="vocabulary commands")
    vsub = p.add_subparsers(dest="vocab_command", required=True,
                            parser_class=_Parser)
    pb = vsub.add_parser("build")
    pb.add_argument("--corpus", action="append", required=True)
    pb.add_argument("--cap", type=int, default=10000)
    pb.add_argument("--out", required=True)
    pb.set_defaults(func=cmd_vocab_build)

    p = sub.add_parser("synth", help="synthetic corpus generation")
    ssub = p.add_subparsers(dest="synth_command", required=True,
                            parser_class=_Parser)
    pg = ssub.add_parser("generate")
    pg.add_argument("--config", required=True)
    pg.add_argument("--out", required=True)
    pg.add_argument("--seed", type=int)
    pg.set_defaults(func=cmd_synth_generate)

    p = sub.add_parser("align", help="CCA space alignment")
    asub = p.add_subparsers(dest="align_command", required=True,
                            parser_class=_Parser)
    pf = asub.add_parser("fit")
    pf.add_argument("--src-vectors", required=True)
    pf.add_argument("--piv-vectors", required=True)
    pf.add_argument("--lexicon", required=True)
    pf.add_argument("--swap-lexicon", action="store_true",
                    help="lexicon lines are (pivot, source)")
    pf.add_argument("--ridge", type=float)
    pf.add_argument("--directions", type=int)
    pf.add_argument("--out", required=True)
    pf.set_defaults(func=cmd_align_fit)
    pa = asub.add_parser("apply")
    pa.add_argument("--model", required=True)
    pa.add_argument("--vectors", required=True)
    pa.add_argument("--out", required=True)
    pa.set_defaults(func=cmd_align_apply)

    p = sub.add_parser("train", help="train one model")
    _add_common_flags(p)
    p.set_defaults(func=cmd_train)

    for name, func in (("evaluate", cmd_evaluate), ("predict", cmd_predict)):
        p = sub.add_parser(name)
        p.add_argument("--model", required=True)
        p.add_argument("--vocab", required=True)
        p.add_argument("--test", required=True)
        p.add_argument("--test-vocab")
        p.add_argument("--test-vectors",
                       help="projected vectors for cross-lingual evaluation")
        p.add_argument("--out", default="out")
        p.set_defaults(func=func)

    p = sub.add_parser("protocol", help="full multi-seed experiment grid")
    _add_common_flags(p, seeds=True)
    p.set_defaults(func=cmd_protocol)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DataError, NumericError, FileNotFoundError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"dialact: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
