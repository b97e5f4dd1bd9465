"""Multi-width 1-D convolutional text classifier, numpy only.

token ids -> trainable embedding -> one bank of filters per kernel width
(ReLU, global max over positions) -> concatenation -> dense ReLU -> dropout
-> 3-way softmax.
"""
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

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
class CnnConfig:
    vocab_size: int
    max_len: int = 40
    embed_dim: int = 64
    filter_count: int = 128
    kernel_sizes: tuple = (3, 4, 6)
    dense_units: int = 128
    dropout: float = 0.5
    classes: int = N_CLASSES
    epochs: int = 30
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 42

    def __post_init__(self):
        if max(self.kernel_sizes) > self.max_len:
            raise ValueError(
                f"kernel size {max(self.kernel_sizes)} exceeds max_len {self.max_len}"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")


@dataclass
class CnnModel:
    config: CnnConfig
    embedding: np.ndarray
    conv_w: list
    conv_b: list
    dense_w: np.ndarray
    dense_b: np.ndarray
    out_w: np.ndarray
    out_b: np.ndarray
    loss_trace: list = field(default_factory=list)

    @classmethod
    def initialize(cls, config):
        rng = np.random.default_rng(config.seed)
        E, F = config.embed_dim, config.filter_count
        embedding = rng.normal(0.0, 0.05, size=(config.vocab_size, E))
        conv_w, conv_b = [], []
        for s in config.kernel_sizes:
            fan_in = s * E
            conv_w.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, F)))
            conv_b.append(np.zeros(F))
        concat = F * len(config.kernel_sizes)
        dense_w = rng.normal(0.0, np.sqrt(2.0 / concat), size=(concat, config.dense_units))
        out_w = rng.normal(
            0.0, np.sqrt(2.0 / config.dense_units), size=(config.dense_units, config.classes)
        )
        return cls(
            config,
            embedding,
            conv_w,
            conv_b,
            dense_w,
            np.zeros(config.dense_units),
            out_w,
            np.zeros(config.classes),
        )

    @property
    def params(self):
        out = [self.embedding]
        for w, b in zip(self.conv_w, self.conv_b):
            out += [w, b]
        return out + [self.dense_w, self.dense_b, self.out_w, self.out_b]

    def _check(self, seqs):
        seqs = np.asarray(seqs, dtype=np.int64)
        if seqs.ndim != 2 or seqs.shape[1] != self.config.max_len:
            raise ValueError(f"expected sequences of length {self.config.max_len}, got {seqs.shape}")
        if seqs.size and (seqs.min() < 0 or seqs.max() >= self.config.vocab_size):
            raise ValueError("token id outside vocabulary")
        return seqs

    def forward(self, seqs, train=False, rng=None, cache=False):
        cfg = self.config
        emb = self.embedding[seqs]  # B, L, E
        B, L, E = emb.shape
        pooled, banks = [], []
        for s, w, b in zip(cfg.kernel_sizes, self.conv_w, self.conv_b):
            P = L - s + 1
            win = sliding_window_view(emb, s, axis=1)  # B, P, E, s
            win = np.ascontiguousarray(win.transpose(0, 1, 3, 2)).reshape(B, P, s * E)
            conv = win @ w + b  # B, P, F
            arg = conv.argmax(axis=1)  # B, F
            top = np.take_along_axis(conv, arg[:, None, :], axis=1)[:, 0, :]
            pooled.append(np.maximum(top, 0.0))
            banks.append((win, arg, top))
        concat = np.concatenate(pooled, axis=1)
        pre = concat @ self.dense_w + self.dense_b
        hidden = np.maximum(pre, 0.0)
        mask = None
        if train and cfg.dropout > 0:
            keep = 1.0 - cfg.dropout
            mask = (rng.random(hidden.shape) < keep) / keep
            dropped = hidden * mask
        else:
            dropped = hidden
        logits = dropped @ self.out_w + self.out_b
        if cache:
            return logits, dict(
                seqs=seqs, banks=banks, concat=concat, pre=pre, dropped=dropped, mask=mask
            )
        return logits

    def loss_and_grads(self, seqs, y, train=False, rng=None):
        cfg = self.config
        logits, c = self.forward(seqs, train=train, rng=rng, cache=True)
        loss, d = softmax_xent(logits, y)
        g_out_w = c["dropped"].T @ d
        g_out_b = d.sum(axis=0)
        d = d @ self.out_w.T
        if c["mask"] is not None:
            d = d * c["mask"]
        d = d * (c["pre"] > 0)
        g_dense_w = c["concat"].T @ d
        g_dense_b = d.sum(axis=0)
        d_concat = d @ self.dense_w.T
        B, L = seqs.shape
        E, F = cfg.embed_dim, cfg.filter_count
        d_emb = np.zeros((B, L, E))
        g_conv_w, g_conv_b = [], []
        for i, (s, w) in enumerate(zip(cfg.kernel_sizes, self.conv_w)):
            win, arg, top = c["banks"][i]
            P = win.shape[1]
            d_pool = d_concat[:, i * F : (i + 1) * F] * (top > 0)
            d_conv = np.zeros((B, P, F))
            np.put_along_axis(d_conv, arg[:, None, :], d_pool[:, None, :], axis=1)
            g_conv_w.append(win.reshape(B * P, s * E).T @ d_conv.reshape(B * P, F))
            g_conv_b.append(d_pool.sum(axis=0))
            d_win = (d_conv @ w.T).reshape(B, P, s, E)
            for o in range(s):
                d_emb[:, o : o + P, :] += d_win[:, :, o, :]
        g_emb = np.zeros_like(self.embedding)
        np.add.at(g_emb, seqs.reshape(-1), d_emb.reshape(-1, E))
        grads = [g_emb]
        for gw, gb in zip(g_conv_w, g_conv_b):
            grads += [gw, gb]
        grads += [g_dense_w, g_dense_b, g_out_w, g_out_b]
        return loss, grads

    def loss(self, seqs, y, batch=2048):
        total = 0.0
        for start in range(0, len(seqs), batch):
            part = seqs[start : start + batch]
            total += softmax_xent(self.forward(part), y[start : start + batch])[0] * len(part)
        return total / len(seqs)

    def predict_proba(self, seqs, batch=2048, dtype=np.float64):
        seqs = self._check(seqs)
        if len(seqs) == 0:
            return np.zeros((0, self.config.classes), dtype=dtype)
        model = self if dtype == np.float64 else self.astype(dtype)
        out = [softmax(model.forward(seqs[i : i + batch])) for i in range(0, len(seqs), batch)]
        return np.vstack(out)

    def astype(self, dtype):
        c = lambda a: a.astype(dtype)
        return CnnModel(
            self.config,
            c(self.embedding),
            [c(w) for w in self.conv_w],
            [c(b) for b in self.conv_b],
            c(self.dense_w),
            c(self.dense_b),
            c(self.out_w),
            c(self.out_b),
            list(self.loss_trace),
        )

    def save(self, path):
        save_params(path, "cnn", self.config, self.params, {"loss_trace": self.loss_trace})

    @classmethod
    def load(cls, path):
        meta, arrays = load_params(path, "cnn")
        cfg = meta["config"]
        cfg["kernel_sizes"] = tuple(cfg["kernel_sizes"])
        config = CnnConfig(**cfg)
        nk = len(config.kernel_sizes)
        conv = arrays[1 : 1 + 2 * nk]
        rest = arrays[1 + 2 * nk :]
        return cls(config, arrays[0], conv[0::2], conv[1::2], *rest, meta["extra"]["loss_trace"])


def cnn_train(seqs, y, cfg, init=None, epoch_callback=None):
    """Adam on mini-batches with seeded shuffling and dropout.

    ``loss_trace[e - 1]`` is the mean training mini-batch loss of epoch ``e``.
    """
    seqs = np.asarray(seqs, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    model = init or CnnModel.initialize(cfg)
    model._check(seqs)
    model.loss_trace = []
    if cfg.epochs == 0 or len(seqs) == 0:
        return model
    shuffle_rng = np.random.default_rng([cfg.seed, 1])
    drop_rng = np.random.default_rng([cfg.seed, 2])
    opt = Adam(model.params, lr=cfg.learning_rate)
    n = len(seqs)
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = model.loss_and_grads(seqs[idx], y[idx], train=True, rng=drop_rng)
            if not np.isfinite(loss):
                raise DivergedTraining(f"non-finite loss in epoch {epoch}")
            total += loss * len(idx)
            opt.step(grads)
        model.loss_trace.append(total / n)
        if epoch_callback is not None:
            epoch_callback(epoch, model)
    return model


def cnn_predict(model, seqs, dtype=np.float64):
    proba = model.predict_proba(seqs, dtype=dtype)
    return argmax_lowest(proba), proba
