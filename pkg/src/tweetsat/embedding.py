"""Tokenisation, pretrained word vectors, document vectors and CNN id sequences."""
import logging
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

PAD_ID = 0
OOV_ID = 1
DEFAULT_MAX_LEN = 40

_SPLIT_RE = re.compile(r"[\W_]+")


class EmbeddingError(ValueError):
    pass


def tokenize(text):
    """Lowercase and split on runs of non-alphanumeric characters."""
    return [t for t in _SPLIT_RE.split(text.lower()) if t]


class EmbeddingTable:
    """Token -> vector lookup backed by one dense matrix in file order."""

    def __init__(self, tokens, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(tokens):
            raise EmbeddingError("matrix rows must match token count")
        self.vocab_order = list(tokens)
        self.matrix = matrix
        self.dim = matrix.shape[1]
        self.index = {t: i for i, t in enumerate(self.vocab_order)}
        if len(self.index) != len(self.vocab_order):
            raise EmbeddingError("duplicate tokens")
        self._unit = None

    def __len__(self):
        return len(self.vocab_order)

    def __contains__(self, token):
        return token in self.index

    def vector(self, token):
        return self.matrix[self.index[token]]

    @property
    def vectors(self):
        return {t: self.matrix[i] for i, t in enumerate(self.vocab_order)}

    def unit_rows(self):
        if self._unit is None:
            norms = np.linalg.norm(self.matrix, axis=1, keepdims=True)
            norms[norms == 0] = 1.0
            self._unit = self.matrix / norms
        return self._unit


def load_embeddings(path, expected_dim):
    """Parse a GloVe-style text file (token followed by `expected_dim` floats)."""
    tokens = []
    rows = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.rstrip(" ").split(" ")
            token, values = parts[0], parts[1:]
            if len(values) != expected_dim:
                raise EmbeddingError(
                    f"{path}: dimension mismatch at line {lineno}: "
                    f"{len(values)} values, expected {expected_dim}"
                )
            try:
                vec = [float(v) for v in values]
            except ValueError:
                raise EmbeddingError(f"{path}: malformed line {lineno}") from None
            if token in seen:
                logger.warning("%s: duplicate token %r at line %d ignored", path, token, lineno)
                continue
            seen.add(token)
            tokens.append(token)
            rows.append(vec)
    matrix = np.array(rows, dtype=np.float64).reshape(len(rows), expected_dim)
    return EmbeddingTable(tokens, matrix)


def save_embeddings(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        for token, row in zip(table.vocab_order, table.matrix):
            fh.write(token + " " + " ".join(repr(float(v)) for v in row) + "\n")


def doc_vector(tokens, table):
    """Mean of in-vocabulary token vectors; zeros if none are known."""
    idx = [table.index[t] for t in tokens if t in table.index]
    if not idx:
        return np.zeros(table.dim)
    return table.matrix[idx].mean(axis=0)


def doc_vectors(texts, table):
    return np.vstack([doc_vector(tokenize(t), table) for t in texts]) if texts else np.zeros((0, table.dim))


@dataclass(frozen=True)
class Vocab:
    token_to_id: dict
    max_len: int = DEFAULT_MAX_LEN
    pad_id: int = PAD_ID
    oov_id: int = OOV_ID

    @property
    def size(self):
        return len(self.token_to_id) + 2


def build_vocab(texts, max_size, max_len=DEFAULT_MAX_LEN):
    """Frequency-ranked vocabulary; ids 0 and 1 are reserved for pad/OOV."""
    counts = Counter()
    for text in texts:
        counts.update(tokenize(text))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ranked = ranked[: max(0, max_size - 2)]
    return Vocab({tok: i + 2 for i, (tok, _) in enumerate(ranked)}, max_len=max_len)


def encode_sequence(tokens, vocab):
    ids = [vocab.token_to_id.get(t, vocab.oov_id) for t in tokens[: vocab.max_len]]
    ids += [vocab.pad_id] * (vocab.max_len - len(ids))
    return np.array(ids, dtype=np.int64)


def encode_texts(texts, vocab):
    if not texts:
        return np.zeros((0, vocab.max_len), dtype=np.int64)
    return np.vstack([encode_sequence(tokenize(t), vocab) for t in texts])
