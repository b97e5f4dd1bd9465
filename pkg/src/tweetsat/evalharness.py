"""Stratified splitting, metrics, the text-only vs extended ablation and reports."""
import csv
import hashlib
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import features as F
from ._io import atomic_write
from .augment import AugmentConfig, build_augmented_dataset
from .embedding import build_vocab, doc_vectors, encode_texts, tokenize
from .models.cnn import CnnConfig, cnn_predict, cnn_train
from .models.mlp import ANN_CONFIGS, mlp_predict, mlp_train, with_overrides
from .models.svm import SvmConfig, svm_predict, svm_train
from .textclean import clean_tweet

logger = logging.getLogger(__name__)

ALL_MODELS = ("SVM", "V1", "V2", "V3", "V4", "V5", "V6", "CNN")
REPORT_FORMAT = "tweetsat-report/1"
CSV_METRICS = ("accuracy", "macro_f1") + tuple(f"confusion_{t}_{p}" for t in range(3) for p in range(3))
COORD_FUSION_NOTE = (
    "missing tweet_coord filled with the training-split centroid of tweets sharing "
    "the user's timezone, else (0, 0)"
)


class HarnessError(ValueError):
    pass


def stratified_split(labels, ratio=0.8, seed=42):
    """Per-class shuffled split; returns (train_idx, test_idx) as int arrays."""
    labels = np.asarray(labels)
    if not 0.0 < ratio < 1.0:
        raise HarnessError("ratio must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if len(idx) < 2:
            raise HarnessError(f"class {c} has fewer than 2 members")
        idx = rng.permutation(idx)
        n_train = int(math.floor(ratio * len(idx) + 0.5))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train.append(idx[:n_train])
        test.append(idx[n_train:])
    train = rng.permutation(np.concatenate(train))
    test = rng.permutation(np.concatenate(test))
    return train, test


def _check_pair(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if len(pred) != len(truth):
        raise HarnessError(f"length mismatch: {len(pred)} predictions vs {len(truth)} labels")
    if len(truth) == 0:
        raise HarnessError("empty prediction set")
    return pred, truth


def accuracy(pred, truth):
    pred, truth = _check_pair(pred, truth)
    return float(np.mean(pred == truth))


def confusion(pred, truth, n_classes=3):
    """confusion[t][p] counts items of true class t predicted as p."""
    pred, truth = _check_pair(pred, truth)
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (truth.astype(int), pred.astype(int)), 1)
    return cm


def macro_f1(cm):
    cm = np.asarray(cm, dtype=np.float64)
    scores = []
    for c in range(cm.shape[0]):
        tp = cm[c, c]
        denom = cm[c, :].sum() + cm[:, c].sum()
        scores.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(scores))


def majority_baseline(test_labels):
    counts = np.bincount(np.asarray(test_labels, dtype=np.int64), minlength=3)
    cls = int(np.argmax(counts))
    return cls, float(counts[cls] / counts.sum())


def cell_seed(master, name):
    digest = hashlib.sha256(f"{master}:{name}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


@dataclass
class ExperimentPlan:
    models: tuple = ("SVM", "V1", "V2", "V3", "V4", "V5", "V6")
    feature_sets: tuple = F.FEATURE_SETS
    split_ratio: float = 0.8
    seed: int = 42
    pca_k: int = 7
    text_field: str = "filtered"
    normalization: str = "minmax"
    svm_kernel: str = "linear"
    svm_C: float = 10.0
    mlp_epochs: int = 30
    mlp_learning_rate: float = 1e-3
    cnn_augment: bool = True
    cnn_augment_factor: float = 3.0
    cnn_epochs: int = 5
    cnn_batch_size: int = 64
    cnn_max_len: int = 40
    cnn_vocab_size: int = 20000

    def __post_init__(self):
        self.models = tuple(self.models)
        self.feature_sets = tuple(self.feature_sets)
        if not 0.0 < self.split_ratio < 1.0:
            raise HarnessError("split_ratio must lie in (0, 1)")
        for m in self.models:
            if m not in ALL_MODELS:
                raise HarnessError(f"unknown model {m!r}")
        for f in self.feature_sets:
            if f not in F.FEATURE_SETS:
                raise HarnessError(f"unknown feature set {f!r}")
        if self.text_field not in ("filtered", "no_url"):
            raise HarnessError("text_field must be 'filtered' or 'no_url'")
        if self.normalization not in ("minmax", "zscore"):
            raise HarnessError("normalization must be 'minmax' or 'zscore'")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise HarnessError(f"unknown plan keys: {sorted(unknown)}")
        return cls(**data)

    def cells(self):
        # the CNN reads token sequences, so it only runs on the text-only set
        return [
            (m, f)
            for m in self.models
            for f in self.feature_sets
            if not (m == "CNN" and f == F.EXTENDED)
        ]

    def to_dict(self):
        d = asdict(self)
        d["models"] = list(self.models)
        d["feature_sets"] = list(self.feature_sets)
        return d


@dataclass
class PreparedFeatures:
    pca: F.PcaModel
    context: F.ExtendedContext
    scalers: dict
    train: dict  # feature set -> FeatureMatrix
    test: dict
    texts: list = field(repr=False, default=None)


def _scaler_fit(X, kind):
    if kind == "minmax":
        return F.normalize_fit(X)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    return ("zscore", mu, np.where(sd > 0, sd, 1.0))


def _scaler_apply(s, X):
    if isinstance(s, F.Normalizer):
        return F.normalize_apply(s, X)
    _, mu, sd = s
    return (X - mu) / sd


def record_texts(records, text_field="filtered"):
    out = []
    for r in records:
        c = clean_tweet(r.text_raw)
        out.append(c.filtered if text_field == "filtered" else c.no_url)
    return out


def prepare_features(records, train_idx, test_idx, table, plan):
    """Fit every transform on the training rows and featurise both splits."""
    texts = record_texts(records, plan.text_field)
    vecs = doc_vectors(texts, table)
    tr, te = np.asarray(train_idx), np.asarray(test_idx)
    if plan.pca_k:
        pca = F.pca_fit(vecs[tr], plan.pca_k)
        text_tr, text_te = F.pca_transform(pca, vecs[tr]), F.pca_transform(pca, vecs[te])
        text_names = [f"pc{i + 1}" for i in range(plan.pca_k)]
    else:
        pca = None
        text_tr, text_te = vecs[tr], vecs[te]
        text_names = [f"emb{i + 1}" for i in range(vecs.shape[1])]
    train_records = [records[i] for i in tr]
    ctx = F.fit_extended_context(train_records)
    ext_tr = F.encode_extended_matrix(train_records, ctx)
    ext_te = F.encode_extended_matrix([records[i] for i in te], ctx)
    scalers, train, test = {}, {}, {}
    for fs in plan.feature_sets:
        a = F.assemble(text_tr, ext_tr, fs, text_names, ctx.names)
        b = F.assemble(text_te, ext_te, fs, text_names, ctx.names)
        s = _scaler_fit(a.values, plan.normalization)
        scalers[fs] = s
        train[fs] = F.FeatureMatrix(_scaler_apply(s, a.values), a.column_names, fs)
        test[fs] = F.FeatureMatrix(_scaler_apply(s, b.values), b.column_names, fs)
    return PreparedFeatures(pca, ctx, scalers, train, test, texts)


def _run_tabular(model, Xtr, ytr, Xte, plan, seed):
    if model == "SVM":
        m = svm_train(Xtr, ytr, SvmConfig(C=plan.svm_C, kernel=plan.svm_kernel), seed=seed)
        extra = {"kkt_gap": max(pm.gap for pm in m.machines)}
        return svm_predict(m, Xte), extra
    cfg = with_overrides(
        ANN_CONFIGS[model], epochs=plan.mlp_epochs, learning_rate=plan.mlp_learning_rate, seed=seed
    )
    m = mlp_train(Xtr, ytr, cfg)
    pred, _ = mlp_predict(m, Xte)
    return pred, {"loss_trace": [float(v) for v in m.loss_trace]}


def _run_cnn(records, texts, tr, te, y, table, plan, seed):
    train_records = [records[i] for i in tr]
    if plan.cnn_augment:
        aug = build_augmented_dataset(
            train_records, table, AugmentConfig(target_factor=plan.cnn_augment_factor, seed=seed)
        )
        train_texts = [s.text for s in aug.samples]
        ytr = np.array([s.label for s in aug.samples], dtype=np.int64)
        aug_warnings = list(aug.warnings)
    else:
        train_texts = [texts[i] for i in tr]
        ytr = y[tr]
        aug_warnings = []
    vocab = build_vocab(train_texts, plan.cnn_vocab_size, plan.cnn_max_len)
    Str = encode_texts(train_texts, vocab)
    Ste = encode_texts([texts[i] for i in te], vocab)
    cfg = CnnConfig(
        vocab_size=vocab.size,
        max_len=plan.cnn_max_len,
        epochs=plan.cnn_epochs,
        batch_size=plan.cnn_batch_size,
        seed=seed,
    )
    model = cnn_train(Str, ytr, cfg)
    pred, _ = cnn_predict(model, Ste)
    return pred, {
        "train_samples": int(len(Str)),
        "vocab_size": int(vocab.size),
        "loss_trace": [float(v) for v in model.loss_trace],
        "augment_warnings": aug_warnings,
    }


def run_experiment(records, table, plan=None):
    """Train and score every (model, feature set) cell on one shared split."""
    plan = plan or ExperimentPlan()
    t_start = time.perf_counter()
    y = np.array([r.label for r in records], dtype=np.int64)
    report = {
        "format": REPORT_FORMAT,
        "config": plan.to_dict(),
        "config_hash": hashlib.sha256(
            json.dumps(plan.to_dict(), sort_keys=True).encode()
        ).hexdigest(),
        "seeds": {"master": plan.seed, "cells": {}},
        "notes": [COORD_FUSION_NOTE],
        "data": {},
        "baseline": {},
        "cells": [],
        "improvement": [],
    }
    timing = {"cells": {}}
    cells = plan.cells()
    if not cells:
        report["timing"] = {"cells": {}, "total_seconds": time.perf_counter() - t_start}
        return report
    tr, te = stratified_split(y, plan.split_ratio, plan.seed)
    prep = prepare_features(records, tr, te, table, plan)
    lengths = np.array([len(tokenize(t)) for t in prep.texts])
    report["data"] = {
        "n_records": int(len(records)),
        "n_train": int(len(tr)),
        "n_test": int(len(te)),
        "test_class_counts": np.bincount(y[te], minlength=3).tolist(),
        "token_length_p99": float(np.percentile(lengths, 99)) if len(lengths) else 0.0,
        "extended_columns": len(prep.context.names),
    }
    base_cls, base_acc = majority_baseline(y[te])
    report["baseline"] = {"majority_class": base_cls, "accuracy": base_acc}
    for model, fs in cells:
        name = f"{model}/{fs}"
        seed = cell_seed(plan.seed, name)
        report["seeds"]["cells"][name] = seed
        cell = {"model": model, "feature_set": fs}
        t0 = time.perf_counter()
        try:
            if model == "CNN":
                pred, extra = _run_cnn(records, prep.texts, tr, te, y, table, plan, seed)
                cell["n_features"] = plan.cnn_max_len
            else:
                Xtr, Xte = prep.train[fs].values, prep.test[fs].values
                pred, extra = _run_tabular(model, Xtr, y[tr], Xte, plan, seed)
                cell["n_features"] = int(Xtr.shape[1])
            cm = confusion(pred, y[te])
            cell["status"] = "ok"
            cell["accuracy"] = accuracy(pred, y[te])
            cell["macro_f1"] = macro_f1(cm)
            cell["confusion"] = cm.tolist()
            cell.update(extra)
        except Exception as exc:  # one failed cell must not sink the rest
            logger.exception("cell %s failed", name)
            cell["status"] = "error"
            cell["error"] = f"{type(exc).__name__}: {exc}"
        timing["cells"][name] = time.perf_counter() - t0
        report["cells"].append(cell)
    report["improvement"] = improvement_table(report["cells"])
    timing["total_seconds"] = time.perf_counter() - t_start
    report["timing"] = timing
    return report


def improvement_table(cells):
    """Extended minus TextOnly accuracy, in percentage points, per model."""
    by = {(c["model"], c["feature_set"]): c for c in cells if c.get("status") == "ok"}
    rows = []
    seen = []
    for c in cells:
        if c["model"] not in seen:
            seen.append(c["model"])
    for m in seen:
        a = by.get((m, F.TEXT_ONLY))
        b = by.get((m, F.EXTENDED))
        if a is None or b is None:
            continue
        rows.append(
            {
                "model": m,
                "text_only": a["accuracy"],
                "extended": b["accuracy"],
                "improvement_pp": (b["accuracy"] - a["accuracy"]) * 100.0,
            }
        )
    return rows


def deterministic_view(report):
    """The report minus its wall-clock section."""
    return {k: v for k, v in report.items() if k != "timing"}


def report_to_json(report):
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def report_to_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "feature_set", "metric", "value"])
    for c in report.get("cells", []):
        ok = c.get("status") == "ok"
        for metric in CSV_METRICS:
            if not ok:
                value = ""
            elif metric.startswith("confusion_"):
                _, t, p = metric.split("_")
                value = c["confusion"][int(t)][int(p)]
            else:
                value = repr(c[metric])
            w.writerow([c["model"], c["feature_set"], metric, value])
    return buf.getvalue()


def emit_report(report, path, format="json"):
    if format == "json":
        text = report_to_json(report)
    elif format == "csv":
        text = report_to_csv(report)
    else:
        raise HarnessError(f"unknown report format {format!r}")
    with atomic_write(path, newline="") as fh:
        fh.write(text)
    return path


def load_report(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def format_improvement(report):
    rows = report.get("improvement", [])
    lines = [f"{'model':<6} {'TextOnly':>9} {'Extended':>9} {'delta_pp':>9}"]
    for r in rows:
        lines.append(
            f"{r['model']:<6} {r['text_only'] * 100:>8.2f}% {r['extended'] * 100:>8.2f}% "
            f"{r['improvement_pp']:>+9.2f}"
        )
    base = report.get("baseline", {})
    if base:
        lines.append(f"majority baseline: {base['accuracy'] * 100:.2f}% (class {base['majority_class']})")
    return "\n".join(lines)
