"""Synthetic stand-ins for the airline-tweet CSV and a GloVe-style vector file.

The generated corpus has the same 15-column layout, cell formats and null
patterns as the public Tweets.csv. Sentiment depends partly on the words in
the text and partly on airline, hour of day, timezone and user, so both the
text-only and the extended feature sets carry signal. Used by the tests and
the demo scripts when the real files are not available.
"""
import csv
from datetime import datetime, timedelta, timezone

import numpy as np

from ._io import atomic_write
from .corpus import PUBLIC_COLUMNS

AIRLINES = {
    "United": (0.26, -0.3),
    "US Airways": (0.20, -0.6),
    "American": (0.19, -0.3),
    "Southwest": (0.165, 0.4),
    "Delta": (0.15, 0.3),
    "Virgin America": (0.035, 0.6),
}
HANDLES = {
    "United": "united",
    "US Airways": "USAirways",
    "American": "AmericanAir",
    "Southwest": "SouthwestAir",
    "Delta": "JetBlue",  # as in the public data, Delta rows address @JetBlue
    "Virgin America": "VirginAmerica",
}
TIMEZONES = {
    "Eastern Time (US & Canada)": (-0.4, (40.7, -74.0)),
    "Central Time (US & Canada)": (0.0, (41.9, -87.6)),
    "Pacific Time (US & Canada)": (0.4, (37.8, -122.4)),
    "Quito": (-0.2, (-0.2, -78.5)),
    "Atlantic Time (Canada)": (0.2, (44.6, -63.6)),
    "Mountain Time (US & Canada)": (0.3, (39.7, -105.0)),
    "London": (0.5, (51.5, -0.1)),
}
LOCATIONS = ["NYC", "Boston, MA", "Chicago", "San Francisco CA", "Washington, DC", "Texas", "Los Angeles"]

LEXICON = {
    0: ["delayed", "cancelled", "worst", "rude", "lost", "terrible", "waiting", "stuck", "awful", "never"],
    1: ["question", "schedule", "tomorrow", "change", "need", "check", "info", "policy", "route", "status"],
    2: ["thanks", "great", "love", "awesome", "amazing", "best", "friendly", "perfect", "happy", "smooth"],
}
FILLER = [
    "flight", "gate", "crew", "seat", "bag", "plane", "hours", "today", "again", "my", "the",
    "service", "trip", "airport", "ticket", "hold", "call", "phone", "time", "just", "is", "was",
    "to", "for", "on", "and", "a", "with", "this", "your", "you", "we", "i", "me", "please",
]
HASHTAGS = ["#fail", "#travel", "#customerservice", "#delayed", "#love", "#avgeek"]
NAMES = [f"user{i:04d}" for i in range(3000)]


def _class_probs(z):
    # scores for negative / neutral / positive; calibrated for roughly 62/21/17
    s = np.array([1.1 - 1.2 * z, 0.0, -0.3 + 1.2 * z])
    e = np.exp(s - s.max())
    return e / e.sum()


def make_corpus_rows(n=2000, seed=0, text_signal=0.55):
    """Rows (lists of 15 string cells) of a synthetic airline-tweet corpus."""
    rng = np.random.default_rng(seed)
    airlines = list(AIRLINES)
    a_p = np.array([AIRLINES[a][0] for a in airlines])
    a_p = a_p / a_p.sum()
    tzs = list(TIMEZONES)
    user_bias = rng.normal(0.0, 0.6, size=len(NAMES))
    user_pop = rng.zipf(1.6, size=len(NAMES)).astype(float)
    user_pop /= user_pop.sum()
    start = datetime(2015, 2, 16, 0, 0, 0, tzinfo=timezone(timedelta(hours=-8)))
    rows = []
    for i in range(n):
        airline = airlines[rng.choice(len(airlines), p=a_p)]
        u = int(rng.choice(len(NAMES), p=user_pop))
        ts = start + timedelta(seconds=int(rng.integers(0, 9 * 86400)))
        has_tz = rng.random() < 0.67
        tz = tzs[rng.integers(len(tzs))] if has_tz else ""
        hour_bias = 0.5 * np.cos(2 * np.pi * (ts.hour - 14) / 24.0)
        z = (
            AIRLINES[airline][1]
            + (TIMEZONES[tz][0] if tz else 0.0)
            + hour_bias
            + user_bias[u]
            + rng.normal(0.0, 0.4)
        )
        label = int(rng.choice(3, p=_class_probs(z)))
        words = list(rng.choice(FILLER, size=rng.integers(3, 9)))
        n_sent = rng.integers(1, 3)
        for _ in range(n_sent):
            lex = label if rng.random() < text_signal else int(rng.integers(3))
            words.insert(int(rng.integers(len(words) + 1)), str(rng.choice(LEXICON[lex])))
        text = " ".join(words)
        text = f"@{HANDLES[airline]} " + text
        if rng.random() < 0.15:
            text += " " + str(rng.choice(HASHTAGS))
        if rng.random() < 0.1:
            text += f" http://t.co/{rng.integers(10**6, 10**7)}"
        if rng.random() < 0.05:
            text = f"RT @{NAMES[int(rng.integers(len(NAMES)))]}: " + text
        if rng.random() < 0.08:
            text = f"@{HANDLES[airline]} @{NAMES[int(rng.integers(len(NAMES)))]} " + text.split(" ", 1)[1]
        coord = ""
        if rng.random() < 0.07:
            if tz:
                lat, lon = TIMEZONES[tz][1]
            else:
                lat, lon = 39.0, -95.0
            coord = f"[{lat + rng.normal(0, 1.5):.8f}, {lon + rng.normal(0, 1.5):.8f}]"
        sentiment = ("negative", "neutral", "positive")[label]
        conf = f"{rng.uniform(0.33, 1.0):.4f}"
        reason = str(rng.choice(["Late Flight", "Customer Service Issue", "Lost Luggage"])) if label == 0 else ""
        cells = {
            "tweet_id": str(570000000000000000 + i),
            "airline_sentiment": sentiment,
            "airline_sentiment_confidence": conf,
            "negativereason": reason,
            "negativereason_confidence": f"{rng.uniform(0, 1):.4f}" if label == 0 else "",
            "airline": airline,
            "airline_sentiment_gold": sentiment if rng.random() < 0.003 else "",
            "name": NAMES[u],
            "negativereason_gold": reason if (reason and rng.random() < 0.004) else "",
            "retweet_count": str(int(rng.random() < 0.05) * int(rng.integers(1, 5))),
            "text": text,
            "tweet_coord": coord,
            "tweet_created": ts.strftime("%Y-%m-%d %H:%M:%S %z"),
            "tweet_location": str(rng.choice(LOCATIONS)) if rng.random() < 0.65 else "",
            "user_timezone": tz,
        }
        rows.append([cells[c] for c in PUBLIC_COLUMNS])
    return rows


def write_corpus(path, n=2000, seed=0, **kw):
    rows = make_corpus_rows(n, seed, **kw)
    with atomic_write(path, newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PUBLIC_COLUMNS)
        w.writerows(rows)
    return path


def make_embedding_rows(dim=50, seed=0, extra_words=200):
    """(token, vector) pairs where each sentiment lexicon forms a cluster."""
    rng = np.random.default_rng(seed)
    centers = {c: rng.normal(0.0, 1.0, size=dim) for c in LEXICON}
    out = []
    vocab = list(FILLER)
    for c, words in LEXICON.items():
        for w in words:
            out.append((w, centers[c] + rng.normal(0.0, 0.45, size=dim)))
    for w in vocab + [h.lower() for h in HANDLES.values()] + ["rt", "t", "co", "http", "fail", "travel"]:
        out.append((w, rng.normal(0.0, 1.0, size=dim)))
    for k in range(extra_words):
        out.append((f"w{k}", rng.normal(0.0, 1.0, size=dim)))
    seen = set()
    uniq = []
    for tok, v in out:
        if tok not in seen:
            seen.add(tok)
            uniq.append((tok, v))
    return uniq


def write_embeddings(path, dim=50, seed=0, **kw):
    with atomic_write(path) as fh:
        for tok, v in make_embedding_rows(dim, seed, **kw):
            fh.write(tok + " " + " ".join(f"{x:.6f}" for x in v) + "\n")
    return path
