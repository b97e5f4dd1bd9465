"""Fully connected ReLU network with a 3-way softmax head."""
from dataclasses import dataclass, field, replace

import numpy as np

from .common import (
    N_CLASSES,
    Adam,
    DivergedTraining,
    argmax_lowest,
    load_params,
    save_params,
    softmax,
    softmax_xent,
)


@dataclass(frozen=True)
class MlpConfig:
    hidden_sizes: tuple = (16,)
    batch_size: int = 256
    epochs: int = 30
    learning_rate: float = 1e-3
    seed: int = 42

    def __post_init__(self):
        if len(self.hidden_sizes) not in (1, 2) or min(self.hidden_sizes) < 1:
            raise ValueError("hidden_sizes must hold one or two positive widths")


# Hidden widths and batch sizes of the six network variants.
ANN_CONFIGS = {
    "V1": MlpConfig(hidden_sizes=(16,), batch_size=256),
    "V2": MlpConfig(hidden_sizes=(32,), batch_size=256),
    "V3": MlpConfig(hidden_sizes=(64,), batch_size=128),
    "V4": MlpConfig(hidden_sizes=(16, 4), batch_size=256),
    "V5": MlpConfig(hidden_sizes=(32, 8), batch_size=128),
    "V6": MlpConfig(hidden_sizes=(64, 16), batch_size=64),
}


@dataclass
class MlpModel:
    config: MlpConfig
    weights: list
    biases: list
    loss_trace: list = field(default_factory=list)

    @classmethod
    def initialize(cls, config, n_features, zeros=False):
        rng = np.random.default_rng(config.seed)
        sizes = [n_features, *config.hidden_sizes, N_CLASSES]
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            if zeros:
                w = np.zeros((fan_in, fan_out))
            else:
                w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
            weights.append(w)
            biases.append(np.zeros(fan_out))
        return cls(config, weights, biases)

    @property
    def n_features(self):
        return self.weights[0].shape[0]

    @property
    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def forward(self, X, cache=False):
        acts = [X]
        h = X
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if i == last else np.maximum(z, 0.0)
            acts.append(h)
        return (h, acts) if cache else h

    def loss_and_grads(self, X, y):
        logits, acts = self.forward(X, cache=True)
        loss, d = softmax_xent(logits, y)
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = acts[i].T @ d
            grads_b[i] = d.sum(axis=0)
            if i > 0:
                d = (d @ self.weights[i].T) * (acts[i] > 0)
        grads = []
        for gw, gb in zip(grads_w, grads_b):
            grads += [gw, gb]
        return loss, grads

    def loss(self, X, y):
        return softmax_xent(self.forward(X), y)[0]

    def predict_proba(self, X, dtype=np.float64):
        X = np.asarray(X, dtype=dtype)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        if X.shape[0] == 0:
            return np.zeros((0, N_CLASSES), dtype=dtype)
        if dtype != np.float64:
            model = MlpModel(
                self.config,
                [w.astype(dtype) for w in self.weights],
                [b.astype(dtype) for b in self.biases],
            )
            return softmax(model.forward(X))
        return softmax(self.forward(X))

    def save(self, path):
        save_params(path, "mlp", self.config, self.params, {"loss_trace": self.loss_trace})

    @classmethod
    def load(cls, path):
        meta, arrays = load_params(path, "mlp")
        cfg = meta["config"]
        cfg["hidden_sizes"] = tuple(cfg["hidden_sizes"])
        return cls(MlpConfig(**cfg), arrays[0::2], arrays[1::2], meta["extra"]["loss_trace"])


def mlp_train(X, y, cfg=None, init=None):
    """Mini-batch Adam on mean cross-entropy with seeded per-epoch shuffling.

    ``loss_trace[0]`` is the full-data loss at initialisation and
    ``loss_trace[e]`` the loss after epoch ``e``.
    """
    cfg = cfg or ANN_CONFIGS["V1"]
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    model = init or MlpModel.initialize(cfg, X.shape[1])
    model.loss_trace = [model.loss(X, y)] if len(X) else []
    if cfg.epochs == 0 or len(X) == 0:
        return model
    rng = np.random.default_rng([cfg.seed, 1])
    params = model.params
    opt = Adam(params, lr=cfg.learning_rate)
    n = len(X)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = model.loss_and_grads(X[idx], y[idx])
            if not np.isfinite(loss):
                raise DivergedTraining(f"non-finite loss in epoch {epoch}")
            opt.step(grads)
        full = model.loss(X, y)
        if not np.isfinite(full):
            raise DivergedTraining(f"non-finite loss in epoch {epoch}")
        model.loss_trace.append(full)
    return model


def mlp_predict(model, X, dtype=np.float64):
    proba = model.predict_proba(X, dtype=dtype)
    return argmax_lowest(proba), proba


def with_overrides(cfg, **kw):
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
