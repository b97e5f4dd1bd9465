"""Label-preserving text augmentation for the CNN training set.

Each record contributes its raw text, the intermediates produced by
stripping usernames, hashtags and retweet tails in that order, and then
word-level (embedding-neighbour substitution) and sentence-level (adjacent
swap / token deletion) variants until the per-record target is met.
A final pass normalises every text and drops exact duplicates globally.
"""
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .textclean import remove_hashtags, remove_retweets, remove_urls, remove_usernames

logger = logging.getLogger(__name__)

ORIGINS = ("original", "progressive", "word_aug", "sentence_aug")
SENTENCE_OPS = ("swap_adjacent", "delete_token")
NEIGHBOR_VOCAB_CAP = 20000

# Removal order used when deriving intermediates: usernames, hashtags, retweets.
PROGRESSIVE_STEPS = (remove_usernames, remove_hashtags, remove_retweets)

_STRIP_PUNCT = re.compile(r"^(\W*)(.*?)(\W*)$", re.DOTALL)


@dataclass(frozen=True)
class AugmentedSample:
    text: str
    label: int
    origin: str


@dataclass
class AugmentConfig:
    word_sub_rate: float = 0.3
    neighbor_k: int = 5
    sentence_ops: tuple = SENTENCE_OPS
    target_factor: float = 3.0
    seed: int = 42
    retry_budget: int = 10

    def __post_init__(self):
        if not 0.0 <= self.word_sub_rate <= 1.0:
            raise ValueError("word_sub_rate must lie in [0, 1]")
        if self.neighbor_k < 1:
            raise ValueError("neighbor_k must be >= 1")
        if self.target_factor <= 0:
            raise ValueError("target_factor must be positive")
        for op in self.sentence_ops:
            if op not in SENTENCE_OPS:
                raise ValueError(f"unknown sentence op {op!r}")


@dataclass
class AugmentResult:
    samples: list
    warnings: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)


def progressive_variants(raw_text):
    out = [raw_text]
    current = raw_text
    for step in PROGRESSIVE_STEPS:
        candidate = step(current)
        if candidate != current:
            out.append(candidate)
            current = candidate
    return out


class NeighborIndex:
    """Exact cosine nearest neighbours over the first `cap` table rows."""

    def __init__(self, table, cap=NEIGHBOR_VOCAB_CAP):
        self.table = table
        self.cap = min(cap, len(table))
        self._cand = table.unit_rows()[: self.cap]
        self._lookup = lru_cache(maxsize=50000)(self._neighbors)

    def _neighbors(self, token, k):
        i = self.table.index[token]
        q = self.table.unit_rows()[i]
        sims = self._cand @ q
        if i < self.cap:
            sims[i] = -np.inf
        # stable sort: ties resolved by file order
        order = np.argsort(-sims, kind="stable")[:k]
        return tuple(self.table.vocab_order[j] for j in order if np.isfinite(sims[j]))

    def neighbors(self, token, k):
        return self._lookup(token, k)


def _index_for(table):
    idx = getattr(table, "_neighbor_index", None)
    if idx is None:
        idx = NeighborIndex(table)
        table._neighbor_index = idx
    return idx


def word_augment(text, table, cfg, rng):
    """Swap in-vocabulary words for one of their nearest embedding neighbours.

    Words are whitespace-delimited; leading/trailing punctuation is kept and
    the core is looked up lowercased.
    """
    if cfg.word_sub_rate == 0.0:
        return text
    index = _index_for(table)
    words = text.split(" ")
    out = []
    for w in words:
        m = _STRIP_PUNCT.match(w)
        pre, core, post = m.groups()
        key = core.lower()
        if core and key in table.index:
            # draw both numbers unconditionally so the stream does not depend on vocab hits
            u = rng.random()
            pick = rng.integers(cfg.neighbor_k)
            if u < cfg.word_sub_rate:
                nbrs = index.neighbors(key, cfg.neighbor_k)
                if nbrs:
                    core = nbrs[min(pick, len(nbrs) - 1)]
        out.append(pre + core + post)
    return " ".join(out)


def sentence_augment(text, cfg, rng, op=None):
    tokens = text.split()
    if len(tokens) < 2:
        return text
    if op is None:
        op = cfg.sentence_ops[rng.integers(len(cfg.sentence_ops))]
    if op == "swap_adjacent":
        i = rng.integers(len(tokens) - 1)
        tokens[i], tokens[i + 1] = tokens[i + 1], tokens[i]
    elif op == "delete_token":
        i = 1 + rng.integers(len(tokens) - 1)
        del tokens[i]
    else:
        raise ValueError(f"unknown sentence op {op!r}")
    return " ".join(tokens)


def normalize_text(text):
    """Cleaning applied before deduplication: URLs out, whitespace squeezed."""
    return " ".join(remove_urls(text).split())


def record_rng(seed, index):
    return np.random.default_rng([seed, index])


def augment_record(record, table, cfg, index):
    """Candidate samples for one record, deduplicated within the record."""
    rng = record_rng(cfg.seed, index)
    samples = []
    seen = set()

    def add(text, origin):
        norm = normalize_text(text)
        if norm and norm not in seen:
            seen.add(norm)
            samples.append(AugmentedSample(norm, record.label, origin))
            return True
        return False

    variants = progressive_variants(record.text_raw)
    add(variants[0], "original")
    for v in variants[1:]:
        add(v, "progressive")
    sources = [s.text for s in samples]
    target = int(np.ceil(cfg.target_factor))
    budget = cfg.retry_budget * max(target, 1)
    attempts = 0
    use_word = True
    while len(samples) < target and attempts < budget and sources:
        base = sources[rng.integers(len(sources))]
        if use_word and table is not None and cfg.word_sub_rate > 0:
            add(word_augment(base, table, cfg, rng), "word_aug")
        elif cfg.sentence_ops:
            add(sentence_augment(base, cfg, rng), "sentence_aug")
        use_word = not use_word
        attempts += 1
    short = len(samples) < target
    return samples, short


def build_augmented_dataset(records, table, cfg=None):
    """Augment every record, then merge with a global first-wins dedup."""
    cfg = cfg or AugmentConfig()
    if not records:
        raise ValueError("records must be non-empty")
    result = AugmentResult(samples=[])
    seen = {}
    short = 0
    for i, record in enumerate(records):
        samples, was_short = augment_record(record, table, cfg, i)
        short += was_short
        for s in samples:
            if s.text in seen:
                if seen[s.text] != s.label:
                    logger.info("text %r seen under labels %d and %d; keeping first", s.text, seen[s.text], s.label)
                continue
            seen[s.text] = s.label
            result.samples.append(s)
    if short:
        msg = f"{short} of {len(records)} records fell short of target_factor {cfg.target_factor}"
        logger.warning(msg)
        result.warnings.append(msg)
    return result
