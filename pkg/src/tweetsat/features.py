"""PCA, min-max scaling, non-text feature encoding and matrix assembly."""
import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._io import atomic_write

logger = logging.getLogger(__name__)

TEXT_ONLY = "TextOnly"
EXTENDED = "Extended"
FEATURE_SETS = (TEXT_ONLY, EXTENDED)
OTHER_TZ = "OTHER"


class FeatureError(ValueError):
    pass


def jacobi_eigh(a, tol=1e-15, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvectors in the columns,
    unsorted.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        logger.warning("Jacobi iteration hit max_sweeps=%d", max_sweeps)
    return a.diagonal().copy(), v


def sign_normalize(components, eps=1e-12):
    """Flip each row so that its first non-negligible entry is positive."""
    out = components.copy()
    for r in range(out.shape[0]):
        nz = np.flatnonzero(np.abs(out[r]) > eps)
        if nz.size and out[r, nz[0]] < 0:
            out[r] = -out[r]
    return out


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # k x d, orthonormal rows
    eigenvalues: np.ndarray

    @property
    def k(self):
        return self.components.shape[0]


def pca_fit(X, k):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise FeatureError("X must be 2-D")
    n, d = X.shape
    if n < 2:
        raise FeatureError("pca_fit needs at least 2 rows")
    if not 1 <= k <= d:
        raise FeatureError(f"k={k} out of range [1, {d}]")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)
    if not np.any(cov):
        logger.warning("pca_fit: all rows identical; eigenvalues are zero")
    vals, vecs = jacobi_eigh(cov)
    order = np.argsort(-vals, kind="stable")[:k]
    components = sign_normalize(vecs[:, order].T)
    eig = vals[order]
    # Clip round-off negatives on a PSD matrix.
    eig = np.where(eig < 0, np.maximum(eig, -1e-12), eig)
    return PcaModel(mean=mean, components=components, eigenvalues=eig)


def pca_transform(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.mean.shape[0]:
        raise FeatureError(f"expected {model.mean.shape[0]} columns, got shape {X.shape}")
    return (X - model.mean) @ model.components.T


@dataclass(frozen=True)
class Normalizer:
    min: np.ndarray
    max: np.ndarray


def normalize_fit(X):
    X = np.asarray(X, dtype=np.float64)
    return Normalizer(min=X.min(axis=0), max=X.max(axis=0))


def normalize_apply(nrm, X):
    X = np.asarray(X, dtype=np.float64)
    span = nrm.max - nrm.min
    safe = np.where(span > 0, span, 1.0)
    out = (X - nrm.min) / safe
    out[:, span <= 0] = 0.0
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class ExtendedContext:
    airlines: tuple
    timezones: tuple
    user_counts: dict
    tz_centroids: dict = field(default_factory=dict)

    @property
    def names(self):
        cols = [f"airline={a}" for a in self.airlines]
        cols += ["hour_sin", "hour_cos", "dow_sin", "dow_cos", "user_freq"]
        cols += [f"tz={t}" for t in self.timezones] + [f"tz={OTHER_TZ}"]
        cols += ["coord_lat", "coord_lon", "retweets"]
        return cols


def fit_extended_context(records):
    """Statistics for `encode_extended`, computed from training records only."""
    airlines = tuple(sorted({r.airline for r in records if r.airline}))
    timezones = tuple(sorted({r.timezone for r in records if r.timezone}))
    users = {}
    sums = {}
    for r in records:
        if r.user_name:
            users[r.user_name] = users.get(r.user_name, 0) + 1
        if r.tweet_coord is not None and r.timezone:
            lat, lon, cnt = sums.get(r.timezone, (0.0, 0.0, 0))
            sums[r.timezone] = (lat + r.tweet_coord[0], lon + r.tweet_coord[1], cnt + 1)
    centroids = {tz: (lat / c, lon / c) for tz, (lat, lon, c) in sums.items()}
    return ExtendedContext(airlines, timezones, users, centroids)


def encode_extended(record, ctx):
    """Numeric encoding of the non-text fields of one record.

    Layout: airline one-hot, hour and weekday on the unit circle, log user
    frequency, timezone one-hot with an OTHER bucket, a (lat, lon) pair and
    log retweets. A missing coordinate is filled from the training centroid
    of the record's timezone, else (0, 0).
    """
    vec = [1.0 if record.airline == a else 0.0 for a in ctx.airlines]
    ts = record.created_at
    if ts is not None:
        h = 2 * math.pi * ts.hour / 24.0
        d = 2 * math.pi * ts.weekday() / 7.0
        vec += [math.sin(h), math.cos(h), math.sin(d), math.cos(d)]
    else:
        vec += [0.0, 0.0, 0.0, 0.0]
    vec.append(math.log1p(ctx.user_counts.get(record.user_name, 0)))
    tz_hot = [1.0 if record.timezone == t else 0.0 for t in ctx.timezones]
    tz_hot.append(0.0 if any(tz_hot) else 1.0)
    vec += tz_hot
    if record.tweet_coord is not None:
        coord = record.tweet_coord
    else:
        coord = ctx.tz_centroids.get(record.timezone, (0.0, 0.0))
    vec += [float(coord[0]), float(coord[1])]
    vec.append(math.log1p(record.retweet_count))
    return np.array(vec), ctx.names


def encode_extended_matrix(records, ctx):
    if not records:
        return np.zeros((0, len(ctx.names)))
    return np.vstack([encode_extended(r, ctx)[0] for r in records])


@dataclass
class FeatureMatrix:
    values: np.ndarray
    column_names: list
    feature_set: str

    def __post_init__(self):
        if len(set(self.column_names)) != len(self.column_names):
            raise FeatureError("column names must be unique")
        if self.values.ndim != 2 or self.values.shape[1] != len(self.column_names):
            raise FeatureError("values/column_names shape mismatch")
        if not np.all(np.isfinite(self.values)):
            raise FeatureError("non-finite feature values")


def assemble(text_features, extended, mode, text_names=None, extended_names=None):
    text_features = np.asarray(text_features, dtype=np.float64)
    if text_names is None:
        text_names = [f"pc{i + 1}" for i in range(text_features.shape[1])]
    if mode == TEXT_ONLY:
        return FeatureMatrix(text_features.copy(), list(text_names), TEXT_ONLY)
    if mode != EXTENDED:
        raise FeatureError(f"unknown feature set {mode!r}")
    if extended is None:
        raise FeatureError("Extended mode needs the extended matrix")
    extended = np.asarray(extended, dtype=np.float64)
    if extended.shape[0] != text_features.shape[0]:
        raise FeatureError(
            f"row mismatch: {text_features.shape[0]} text rows vs {extended.shape[0]} extended rows"
        )
    if extended_names is None:
        extended_names = [f"x{i + 1}" for i in range(extended.shape[1])]
    return FeatureMatrix(
        np.hstack([text_features, extended]), list(text_names) + list(extended_names), EXTENDED
    )


def write_matrix(fm, path, labels=None):
    """CSV matrix: header of column names, then rows of decimal reals."""
    names = list(fm.column_names) + (["label"] if labels is not None else [])
    with atomic_write(path, newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i, row in enumerate(fm.values):
            cells = [repr(float(v)) for v in row]
            if labels is not None:
                cells.append(str(int(labels[i])))
            w.writerow(cells)


def read_matrix(path):
    """Inverse of `write_matrix`; returns (values, column_names, labels or None)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader if row]
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    if header and header[-1] == "label":
        return values[:, :-1], header[:-1], values[:, -1].astype(np.int64)
    return values, header, None
