"""Softmax cross-entropy, Adam, gradient checking and model persistence."""
import json
from dataclasses import asdict, is_dataclass

import numpy as np

FORMAT_VERSION = 1
N_CLASSES = 3


class DivergedTraining(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_xent(logits, y):
    """Mean cross-entropy and its gradient with respect to the logits."""
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(logsum - z[np.arange(n), y]))
    grad = softmax(logits)
    grad[np.arange(n), y] -= 1.0
    return loss, grad / n


def argmax_lowest(p):
    """Row argmax; np.argmax already returns the first (lowest) index on ties."""
    return np.argmax(p, axis=1)


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1 - b1**self.t
        c2 = 1 - b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def relative_error(a, n):
    return abs(a - n) / max(abs(a), abs(n), 1e-8)


def gradient_check(params, loss_fn, grads, epsilon=1e-5, n_samples=200, seed=0):
    """Largest relative error between analytic and central-difference gradients.

    `params` are the model arrays (perturbed in place and restored),
    `loss_fn()` evaluates the loss at the current parameters and `grads`
    are the analytic gradients at the unperturbed point. At least
    `n_samples` coordinates are checked, or all of them if there are fewer.
    """
    rng = np.random.default_rng(seed)
    sizes = np.array([p.size for p in params])
    total = int(sizes.sum())
    if total <= n_samples:
        flat_ids = np.arange(total)
    else:
        flat_ids = np.sort(rng.choice(total, size=n_samples, replace=False))
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    worst = 0.0
    for fid in flat_ids:
        which = int(np.searchsorted(offsets, fid, side="right") - 1)
        local = int(fid - offsets[which])
        p = params[which].reshape(-1)
        old = p[local]
        p[local] = old + epsilon
        f_plus = loss_fn()
        p[local] = old - epsilon
        f_minus = loss_fn()
        p[local] = old
        numeric = (f_plus - f_minus) / (2 * epsilon)
        analytic = float(grads[which].reshape(-1)[local])
        worst = max(worst, relative_error(analytic, numeric))
    return worst


def _jsonable(obj):
    if is_dataclass(obj):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def save_params(path, family, config, arrays, extra=None):
    """Write parameters to .npz with a JSON metadata record."""
    from .._io import atomic_write

    meta = {
        "format_version": FORMAT_VERSION,
        "family": family,
        "config": _jsonable(config),
        "extra": _jsonable(extra or {}),
    }
    payload = {f"p{i}": np.asarray(a) for i, a in enumerate(arrays)}
    payload["__meta__"] = np.array(json.dumps(meta, sort_keys=True))
    with atomic_write(path, mode="wb") as fh:
        np.savez(fh, **payload)


def load_params(path, family=None):
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        n = len([k for k in data.files if k.startswith("p")])
        arrays = [data[f"p{i}"] for i in range(n)]
    if meta.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: format version {meta.get('format_version')} != {FORMAT_VERSION}"
        )
    if family is not None and meta["family"] != family:
        raise ModelFormatError(f"{path}: holds a {meta['family']} model, not {family}")
    return meta, arrays
