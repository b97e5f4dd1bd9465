"""Command-line entry point: inspect, clean, augment, featurize, train,
evaluate and compare.

Exit codes: 0 success, 1 usage error, 2 data or validation error. Every
output file is written to a temp file and renamed into place. Logs go to
stderr; data goes to files or stdout.
"""
import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from . import features as F
from ._io import atomic_write
from .augment import AugmentConfig, build_augmented_dataset
from .corpus import LABELS, corpus_summary, load_corpus, load_records
from .embedding import build_vocab, doc_vectors, encode_texts, load_embeddings
from .evalharness import (
    ALL_MODELS,
    ExperimentPlan,
    emit_report,
    format_improvement,
    load_report,
    record_texts,
    run_experiment,
)
from .models import (
    ANN_CONFIGS,
    CnnConfig,
    SvmConfig,
    cnn_predict,
    cnn_train,
    mlp_predict,
    mlp_train,
    svm_predict,
    svm_train,
)
from .models.mlp import with_overrides
from .textclean import clean_tweet

logger = logging.getLogger("tweetsat")

DEFAULT_SEED = 42
SEED_ENV = "TWEETSAT_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def load_config(path):
    """Read a TOML or JSON config file, picked by extension."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".json":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    elif ext == ".toml":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    else:
        raise ValueError(f"{path}: config must end in .toml or .json")
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must hold a table/object at top level")
    return data


def _config_defaults(data, command, parser):
    """Top-level keys apply to any command that has that option; a table named
    after the command applies to it alone and must only hold known options."""
    dests = {a.dest for a in parser._actions if a.dest != "help"}
    out = {k.replace("-", "_"): v for k, v in data.items() if not isinstance(v, dict)}
    out = {k: v for k, v in out.items() if k in dests}
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise ValueError(f"config entry {command!r} must be a table")
    for k, v in section.items():
        key = k.replace("-", "_")
        if key not in dests:
            raise UsageError(f"unknown option {k!r} in config section [{command}]")
        out[key] = v
    return out


def _require_inputs(*paths):
    for p in paths:
        if p is not None and not os.path.exists(p):
            raise FileNotFoundError(f"input not found: {p}")


def _check_out(out, *inputs):
    if out is None:
        return
    for p in inputs:
        if p is not None and os.path.exists(p) and os.path.exists(out) and os.path.samefile(p, out):
            raise UsageError(f"--out {out} would overwrite an input file")


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    with atomic_write(path) as fh:
        fh.write(text)


def cmd_inspect(args):
    _require_inputs(args.csv)
    summary = corpus_summary(load_corpus(args.csv)).to_dict()
    _write_json(summary, None)
    if args.summary_out:
        _write_json(summary, args.summary_out)
    return 0


def cmd_clean(args):
    _require_inputs(args.csv)
    _check_out(args.out, args.csv)
    corpus = load_corpus(args.csv)
    if args.text_col not in corpus.column_names:
        raise ValueError(f"{args.csv}: no column {args.text_col!r}")
    j = corpus.column_names.index(args.text_col)
    with atomic_write(args.out, newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(corpus.column_names + ["no_url", "filtered_text"])
        for row in corpus.rows:
            c = clean_tweet(row[j])
            w.writerow(row + [c.no_url, c.filtered])
    logger.info("cleaned %d rows into %s", corpus.row_count, args.out)
    return 0


def cmd_augment(args):
    _require_inputs(args.csv, args.glove)
    _check_out(args.out, args.csv, args.glove)
    records = load_records(args.csv)
    table = load_embeddings(args.glove, args.glove_dim)
    cfg = AugmentConfig(
        target_factor=args.factor,
        seed=args.seed,
        word_sub_rate=args.word_sub_rate,
        neighbor_k=args.neighbor_k,
    )
    result = build_augmented_dataset(records, table, cfg)
    with atomic_write(args.out, newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["text", "label", "origin"])
        for s in result:
            w.writerow([s.text, LABELS[s.label], s.origin])
    logger.info("wrote %d samples from %d records to %s", len(result), len(records), args.out)
    return 0


def cmd_featurize(args):
    _require_inputs(args.csv, args.glove)
    _check_out(args.out, args.csv, args.glove)
    records = load_records(args.csv)
    table = load_embeddings(args.glove, args.glove_dim)
    vecs = doc_vectors(record_texts(records, args.text_field), table)
    if args.pca_k:
        pca = F.pca_fit(vecs, args.pca_k)
        text = F.pca_transform(pca, vecs)
        names = [f"pc{i + 1}" for i in range(args.pca_k)]
    else:
        text = vecs
        names = [f"emb{i + 1}" for i in range(vecs.shape[1])]
    mode = F.EXTENDED if args.mode == "extended" else F.TEXT_ONLY
    ext, ext_names = None, None
    if mode == F.EXTENDED:
        ctx = F.fit_extended_context(records)
        ext, ext_names = F.encode_extended_matrix(records, ctx), ctx.names
    fm = F.assemble(text, ext, mode, names, ext_names)
    if args.normalize == "minmax":
        fm = F.FeatureMatrix(F.normalize_apply(F.normalize_fit(fm.values), fm.values), fm.column_names, mode)
    labels = np.array([r.label for r in records], dtype=np.int64)
    F.write_matrix(fm, args.out, labels=labels)
    logger.info("wrote %d x %d %s matrix to %s", *fm.values.shape, mode, args.out)
    return 0


def _train_tabular(args):
    X, names, y = F.read_matrix(args.input)
    if y is None:
        raise ValueError(f"{args.input}: matrix has no 'label' column")
    if args.model == "SVM":
        cfg = SvmConfig(C=args.C, kernel=args.kernel, gamma=args.gamma)
        model = svm_train(X, y, cfg, seed=args.seed)
        pred = svm_predict(model, X)
        info = {"kkt_gap": max(m.gap for m in model.machines)}
    else:
        cfg = with_overrides(
            ANN_CONFIGS[args.model], epochs=args.epochs, learning_rate=args.lr, seed=args.seed
        )
        model = mlp_train(X, y, cfg)
        pred, _ = mlp_predict(model, X)
        info = {"initial_loss": model.loss_trace[0], "final_loss": model.loss_trace[-1]}
    model.save(args.out)
    info.update(n_features=len(names), train_accuracy=float(np.mean(pred == y)))
    return info


def _train_cnn(args):
    records = load_records(args.input)
    texts = record_texts(records)
    labels = np.array([r.label for r in records], dtype=np.int64)
    if args.augment_factor:
        if not args.glove:
            raise UsageError("--augment-factor needs --glove")
        table = load_embeddings(args.glove, args.glove_dim)
        aug = build_augmented_dataset(
            records, table, AugmentConfig(target_factor=args.augment_factor, seed=args.seed)
        )
        texts = [s.text for s in aug]
        labels = np.array([s.label for s in aug], dtype=np.int64)
    vocab = build_vocab(texts, args.vocab_size, args.max_len)
    seqs = encode_texts(texts, vocab)
    cfg = CnnConfig(
        vocab_size=vocab.size,
        max_len=args.max_len,
        epochs=args.epochs if args.epochs is not None else 5,
        batch_size=args.batch_size,
        learning_rate=args.lr if args.lr is not None else 1e-3,
        seed=args.seed,
    )
    model = cnn_train(seqs, labels, cfg)
    model.save(args.out)
    with atomic_write(args.out + ".vocab.json") as fh:
        json.dump({"max_len": vocab.max_len, "token_to_id": vocab.token_to_id}, fh, sort_keys=True)
    pred, _ = cnn_predict(model, seqs)
    return {
        "train_samples": int(len(seqs)),
        "vocab_size": vocab.size,
        "loss_trace": model.loss_trace,
        "train_accuracy": float(np.mean(pred == labels)),
    }


def cmd_train(args):
    _require_inputs(args.input, args.glove)
    _check_out(args.out, args.input)
    info = _train_cnn(args) if args.model == "CNN" else _train_tabular(args)
    info.update(model=args.model, seed=args.seed, out=args.out)
    _write_json(info, None)
    return 0


def cmd_evaluate(args):
    _require_inputs(args.csv, args.glove, args.plan)
    _check_out(args.out, args.csv, args.glove, args.plan)
    plan_data = load_config(args.plan) if args.plan else {}
    if args.seed is not None:
        plan_data["seed"] = args.seed
    elif "seed" not in plan_data:
        plan_data["seed"] = default_seed()
    for key in ("models", "feature_sets"):
        value = getattr(args, key)
        if value:
            plan_data[key] = [v.strip() for v in value.split(",") if v.strip()]
    for key in ("pca_k", "split_ratio"):
        value = getattr(args, key)
        if value is not None:
            plan_data[key] = value
    plan = ExperimentPlan.from_dict(plan_data)
    records = load_records(args.csv)
    table = load_embeddings(args.glove, args.glove_dim)
    report = run_experiment(records, table, plan)
    emit_report(report, args.out, format=args.format)
    failed = [f"{c['model']}/{c['feature_set']}" for c in report["cells"] if c["status"] != "ok"]
    if failed:
        logger.warning("failed cells: %s", ", ".join(failed))
    sys.stdout.write(format_improvement(report) + "\n")
    return 0


def cmd_compare(args):
    _require_inputs(args.report)
    report = load_report(args.report)
    sys.stdout.write(format_improvement(report) + "\n")
    return 0


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="TOML or JSON file of option defaults")
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = _Parser(prog="tweetsat", description="Airline-tweet sentiment pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("inspect", parents=[common], help="summarise a corpus CSV")
    p.add_argument("csv")
    p.add_argument("--summary-out", help="also write the summary JSON here")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("clean", parents=[common], help="append no_url and filtered_text columns")
    p.add_argument("csv")
    p.add_argument("--text-col", default="text")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("augment", parents=[common], help="write the augmented training set")
    p.add_argument("csv")
    p.add_argument("--glove", required=True)
    p.add_argument("--glove-dim", type=int, default=50)
    p.add_argument("--factor", type=float, default=3.0)
    p.add_argument("--word-sub-rate", type=float, default=0.3)
    p.add_argument("--neighbor-k", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("featurize", parents=[common], help="write a feature matrix CSV")
    p.add_argument("csv")
    p.add_argument("--glove", required=True)
    p.add_argument("--glove-dim", type=int, default=50)
    p.add_argument("--pca-k", type=int, default=7, help="0 keeps the raw document vectors")
    p.add_argument("--mode", choices=["textonly", "extended"], default="extended")
    p.add_argument("--text-field", choices=["filtered", "no_url"], default="filtered")
    p.add_argument("--normalize", choices=["minmax", "none"], default="minmax")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", parents=[common], help="train one model and save it")
    p.add_argument("input", help="feature matrix CSV (SVM, V1..V6) or corpus CSV (CNN)")
    p.add_argument("--model", required=True, choices=ALL_MODELS)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--C", type=float, default=10.0)
    p.add_argument("--kernel", choices=["linear", "rbf"], default="linear")
    p.add_argument("--gamma", type=float)
    p.add_argument("--max-len", type=int, default=40)
    p.add_argument("--vocab-size", type=int, default=20000)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--augment-factor", type=float)
    p.add_argument("--glove")
    p.add_argument("--glove-dim", type=int, default=50)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="run the experiment matrix")
    p.add_argument("--csv", required=True)
    p.add_argument("--glove", required=True)
    p.add_argument("--glove-dim", type=int, default=50)
    p.add_argument("--plan", help="TOML or JSON experiment plan")
    p.add_argument("--seed", type=int)
    p.add_argument("--models", help="comma-separated subset of " + ",".join(ALL_MODELS))
    p.add_argument("--feature-sets", help="comma-separated subset of TextOnly,Extended")
    p.add_argument("--pca-k", type=int)
    p.add_argument("--split-ratio", type=float)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common], help="print the improvement table of a report")
    p.add_argument("report")
    p.set_defaults(func=cmd_compare)
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if args.config:
        _require_inputs(args.config)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        defaults = _config_defaults(load_config(args.config), args.command, subparser)
        # flags win: re-parse with the config installed as defaults
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if hasattr(args, "seed") and args.seed is None and args.command != "evaluate":
        args.seed = default_seed()
    return args


def main(argv=None):
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, args.log_level),
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"tweetsat {args.command}: error: {exc}\n")
        return 1
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
