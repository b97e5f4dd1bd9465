import os
import sys
from pathlib import Path

import numpy as np
import pytest

from tweetsat import synthetic
from tweetsat.corpus import TweetRecord, load_records
from tweetsat.embedding import EmbeddingTable, load_embeddings

ROOT = Path(__file__).resolve().parents[1]


def real_csv_path():
    p = os.environ.get("TWEETSAT_CSV") or str(ROOT / "data" / "Tweets.csv")
    return p if os.path.exists(p) else None


def real_glove_path():
    p = os.environ.get("TWEETSAT_GLOVE") or str(ROOT / "data" / "glove.6B.50d.txt")
    return p if os.path.exists(p) else None


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    synthetic.write_corpus(d / "tweets.csv", n=1500, seed=3)
    synthetic.write_embeddings(d / "glove.txt", dim=50, seed=0)
    return d


@pytest.fixture(scope="session")
def synth_csv(synth_dir):
    return synth_dir / "tweets.csv"


@pytest.fixture(scope="session")
def synth_glove(synth_dir):
    return synth_dir / "glove.txt"


@pytest.fixture(scope="session")
def synth_records(synth_csv):
    return load_records(synth_csv)


@pytest.fixture(scope="session")
def synth_table(synth_glove):
    return load_embeddings(synth_glove, 50)


@pytest.fixture
def toy_table():
    # "good" and "great" point almost the same way; "bad" points elsewhere
    return EmbeddingTable(
        ["good", "great", "bad"],
        np.array([[1.0, 0.1], [0.9, 0.2], [-1.0, 0.3]]),
    )


def make_record(label=0, text="hello", **kw):
    base = dict(
        label=label,
        text_raw=text,
        airline="United",
        user_name="u",
        retweet_count=0,
    )
    base.update(kw)
    return TweetRecord(**base)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in mod.CRITERIA.items():
        status, detail = mod.RESULTS.get(n, ("NOT RUN", "deselected"))
        terminalreporter.write_line(f"criterion {n} ({title}): {status} - {detail}")
