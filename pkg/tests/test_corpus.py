import json
import random

import pytest

from tweetsat.corpus import (
    PUBLIC_COLUMNS,
    RETAINED_COLUMNS,
    CorpusError,
    PrunePolicy,
    RawCorpus,
    corpus_summary,
    encode_label,
    load_corpus,
    parse_coord,
    prune_columns,
    retained_columns,
)


def write(tmp_path, text, name="c.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_small_csv_keeps_empty_cells(tmp_path):
    c = load_corpus(write(tmp_path, "a,b\n1,\nx,y\n"))
    assert c.row_count == 2
    assert c.cell(0, "b") is None
    assert c.cell(1, "b") == "y"


def test_load_unescapes_quotes_and_keeps_literal_nan(tmp_path):
    c = load_corpus(write(tmp_path, 'a,b\n"he said ""hi""",NaN\n"multi\nline",null\n'))
    assert c.rows[0] == ['he said "hi"', "NaN"]
    assert c.rows[1] == ["multi\nline", "null"]
    assert c.cell(0, "b") == "NaN"


def test_ragged_row_reports_index(tmp_path):
    with pytest.raises(CorpusError, match="index 1"):
        load_corpus(write(tmp_path, "a,b\n1,2\n1,2,3\n"))


def test_header_mismatch_lists_names(tmp_path):
    with pytest.raises(CorpusError, match=r"missing=\['c'\] extra=\['b'\]"):
        load_corpus(write(tmp_path, "a,b\n1,2\n"), expected_columns=["a", "c"])


def test_missing_file():
    with pytest.raises(FileNotFoundError, match="nope.csv"):
        load_corpus("nope.csv")


@pytest.mark.parametrize(
    "raw, expected",
    [("negative", 0), ("neutral", 1), ("positive", 2), ("Positive ", 2), (" NEGATIVE", 0)],
)
def test_encode_label(raw, expected):
    assert encode_label(raw) == expected


def test_encode_label_unknown():
    with pytest.raises(CorpusError, match="meh"):
        encode_label("meh")


def test_null_fraction_extremes():
    c = RawCorpus(
        ["airline", "airline_sentiment", "empty", "full"],
        [["United", "negative", "", "x"], ["Delta", "positive", "", "y"]],
    )
    s = corpus_summary(c)
    assert s.null_fraction["empty"] == 1.0
    assert s.null_fraction["full"] == 0.0
    assert s.per_airline_counts == {"United": 1, "Delta": 1}
    assert sum(s.per_class_counts.values()) == c.row_count


def test_summary_requires_columns():
    with pytest.raises(CorpusError, match="airline"):
        corpus_summary(RawCorpus(["text"], [["hi"]]))


def test_null_fraction_row_permutation_invariant(synth_csv):
    c = load_corpus(synth_csv)
    rows = list(c.rows)
    random.Random(0).shuffle(rows)
    assert corpus_summary(RawCorpus(c.column_names, rows)).null_fraction == corpus_summary(c).null_fraction


def test_summary_json_is_stable(synth_csv):
    s = corpus_summary(load_corpus(synth_csv)).to_dict()
    a = json.dumps(s)
    b = json.dumps(corpus_summary(load_corpus(synth_csv)).to_dict())
    assert a == b
    assert list(s["per_airline_counts"]) == sorted(s["per_airline_counts"])


def test_default_prune_keeps_nine_columns(synth_csv):
    c = load_corpus(synth_csv, PUBLIC_COLUMNS)
    assert retained_columns(c) == list(RETAINED_COLUMNS)


def test_noop_policy_keeps_everything(synth_csv):
    c = load_corpus(synth_csv)
    policy = PrunePolicy(null_threshold=1.0, keep_despite_null=frozenset(), always_drop=frozenset())
    assert retained_columns(c, policy) == list(PUBLIC_COLUMNS)


def test_prune_is_idempotent(synth_csv):
    c = load_corpus(synth_csv)
    keep = retained_columns(c)
    projected = c.project(keep)
    assert retained_columns(projected) == keep
    assert prune_columns(projected) == prune_columns(c)


def test_parse_coord():
    assert parse_coord("[40.7, -74.0]") == (40.7, -74.0)
    assert parse_coord("") is None
    with pytest.raises(ValueError):
        parse_coord("40.7;-74")


def test_prune_parses_fields():
    header = list(PUBLIC_COLUMNS)
    row = dict.fromkeys(header, "")
    row.update(
        airline_sentiment="positive",
        airline="Delta",
        name="jo",
        retweet_count="2",
        text="hi",
        tweet_coord="[40.7, -74.0]",
        tweet_created="2015-02-24 11:35:52 -0800",
        user_timezone="Quito",
    )
    c = RawCorpus(header, [[row[h] for h in header]])
    policy = PrunePolicy(null_threshold=1.0)
    (rec,) = prune_columns(c, policy)
    assert rec.label == 2
    assert rec.tweet_coord == (40.7, -74.0)
    assert rec.created_at.hour == 11 and rec.created_at.utcoffset().total_seconds() == -8 * 3600
    assert rec.timezone == "Quito" and rec.location is None
    assert rec.retweet_count == 2


def test_bad_timestamp_keeps_record():
    c = RawCorpus(
        ["airline_sentiment", "text", "tweet_created"], [["neutral", "x", "yesterday"]]
    )
    (rec,) = prune_columns(c, PrunePolicy(null_threshold=1.0))
    assert rec.created_at is None and rec.label == 1


def test_unparseable_coord_reports_row_and_column():
    c = RawCorpus(
        ["airline_sentiment", "text", "tweet_coord"],
        [["neutral", "x", "[1, 2]"], ["neutral", "y", "garbage"]],
    )
    with pytest.raises(CorpusError, match=r"row 1, column 'tweet_coord'"):
        prune_columns(c, PrunePolicy(null_threshold=1.0))
