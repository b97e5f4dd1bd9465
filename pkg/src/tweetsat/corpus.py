"""Loading, summarising and pruning the airline-tweet CSV."""
import csv
import logging
import os
import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

logger = logging.getLogger(__name__)

# Column layout of the public "Twitter US Airline Sentiment" Tweets.csv.
PUBLIC_COLUMNS = (
    "tweet_id",
    "airline_sentiment",
    "airline_sentiment_confidence",
    "negativereason",
    "negativereason_confidence",
    "airline",
    "airline_sentiment_gold",
    "name",
    "negativereason_gold",
    "retweet_count",
    "text",
    "tweet_coord",
    "tweet_created",
    "tweet_location",
    "user_timezone",
)

RETAINED_COLUMNS = (
    "airline_sentiment",
    "airline",
    "name",
    "retweet_count",
    "text",
    "tweet_coord",
    "tweet_created",
    "tweet_location",
    "user_timezone",
)

LABELS = ("negative", "neutral", "positive")
TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S %z"


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus input."""


@dataclass
class RawCorpus:
    column_names: list
    rows: list

    def __post_init__(self):
        width = len(self.column_names)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise CorpusError(f"ragged row at index {i}: {len(row)} cells, expected {width}")

    @property
    def row_count(self):
        return len(self.rows)

    def column(self, name):
        try:
            j = self.column_names.index(name)
        except ValueError:
            raise CorpusError(f"column {name!r} not present") from None
        return [row[j] for row in self.rows]

    def cell(self, i, name):
        """Cell value, or None for an empty (null) cell."""
        value = self.rows[i][self.column_names.index(name)]
        return value if value != "" else None

    def project(self, columns):
        idx = [self.column_names.index(c) for c in columns]
        return RawCorpus(list(columns), [[row[j] for j in idx] for row in self.rows])


@dataclass(frozen=True)
class TweetRecord:
    label: int
    text_raw: str
    airline: str
    user_name: str
    retweet_count: int
    tweet_coord: Optional[tuple] = None
    created_at: Optional[datetime] = None
    location: Optional[str] = None
    timezone: Optional[str] = None

    def __post_init__(self):
        if self.label not in (0, 1, 2):
            raise CorpusError(f"label out of range: {self.label}")
        if self.retweet_count < 0:
            raise CorpusError(f"negative retweet_count: {self.retweet_count}")
        if self.tweet_coord is not None:
            lat, lon = self.tweet_coord
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise CorpusError(f"coordinate out of range: {self.tweet_coord}")


@dataclass
class CorpusSummary:
    per_airline_counts: dict
    per_class_counts: dict
    null_fraction: dict
    row_count: int

    def to_dict(self):
        return {
            "row_count": self.row_count,
            "per_airline_counts": dict(sorted(self.per_airline_counts.items())),
            "per_class_counts": {str(k): v for k, v in sorted(self.per_class_counts.items())},
            "null_fraction": dict(self.null_fraction),
        }


@dataclass
class PrunePolicy:
    """Which columns survive pruning.

    A column is dropped when its null fraction exceeds `null_threshold`
    (unless listed in `keep_despite_null`) or when it is in `always_drop`.
    """

    null_threshold: float = 0.8
    keep_despite_null: frozenset = frozenset({"tweet_coord"})
    always_drop: frozenset = field(
        default_factory=lambda: frozenset(
            {
                "tweet_id",
                "airline_sentiment_confidence",
                "negativereason",
                "negativereason_confidence",
            }
        )
    )


def load_corpus(path, expected_columns=None):
    """Read a CSV with a header row into a RawCorpus.

    Empty cells are kept as empty strings and count as nulls downstream.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"corpus file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusError(f"{path}: missing header row") from None
        if expected_columns is not None and list(header) != list(expected_columns):
            missing = [c for c in expected_columns if c not in header]
            extra = [c for c in header if c not in expected_columns]
            raise CorpusError(
                f"{path}: header mismatch; missing={missing} extra={extra}"
                + ("" if missing or extra else " (order differs)")
            )
        rows = []
        for i, row in enumerate(reader):
            if len(row) != len(header):
                raise CorpusError(
                    f"{path}: ragged row at index {i}: {len(row)} cells, expected {len(header)}"
                )
            rows.append(row)
    return RawCorpus(list(header), rows)


def corpus_summary(corpus: RawCorpus) -> CorpusSummary:
    airlines = corpus.column("airline")
    sentiments = corpus.column("airline_sentiment")
    per_airline = {}
    for a in airlines:
        per_airline[a] = per_airline.get(a, 0) + 1
    per_class = {}
    for s in sentiments:
        label = encode_label(s)
        per_class[label] = per_class.get(label, 0) + 1
    n = corpus.row_count
    null_fraction = {}
    for j, name in enumerate(corpus.column_names):
        empty = sum(1 for row in corpus.rows if row[j] == "")
        null_fraction[name] = empty / n if n else 0.0
    return CorpusSummary(per_airline, per_class, null_fraction, n)


def encode_label(sentiment: str) -> int:
    key = sentiment.strip().lower()
    try:
        return LABELS.index(key)
    except ValueError:
        raise CorpusError(f"unknown label {sentiment!r}") from None


def retained_columns(corpus: RawCorpus, policy: PrunePolicy = None):
    policy = policy or PrunePolicy()
    n = corpus.row_count
    keep = []
    for j, name in enumerate(corpus.column_names):
        if name in policy.always_drop:
            continue
        nulls = sum(1 for row in corpus.rows if row[j] == "")
        frac = nulls / n if n else 0.0
        if frac > policy.null_threshold and name not in policy.keep_despite_null:
            continue
        keep.append(name)
    return keep


_COORD_RE = re.compile(r"^\s*\[\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\]\s*$")


def parse_coord(cell):
    """Parse the dataset's "[lat, lon]" coordinate string."""
    if cell is None or cell == "":
        return None
    m = _COORD_RE.match(cell)
    if not m:
        raise ValueError(f"unparseable coordinate {cell!r}")
    return float(m.group(1)), float(m.group(2))


def parse_timestamp(cell):
    if not cell:
        return None
    try:
        return datetime.strptime(cell.strip(), TIMESTAMP_FORMAT)
    except ValueError:
        return None


def prune_columns(corpus: RawCorpus, policy: PrunePolicy = None):
    """Drop sparse/unusable columns and convert the rest into TweetRecords.

    The retained projection is available as ``retained_columns(corpus, policy)``;
    the records always expose the same typed fields, with dropped columns
    left at their defaults.
    """
    keep = set(retained_columns(corpus, policy))
    col = {name: j for j, name in enumerate(corpus.column_names)}
    required = ("airline_sentiment", "text")
    for name in required:
        if name not in keep:
            raise CorpusError(f"required column {name!r} dropped or absent")

    def get(row, name):
        if name not in keep:
            return ""
        return row[col[name]]

    records = []
    for i, row in enumerate(corpus.rows):
        try:
            label = encode_label(get(row, "airline_sentiment"))
        except CorpusError as exc:
            raise CorpusError(f"row {i}, column 'airline_sentiment': {exc}") from None
        rc = get(row, "retweet_count") or "0"
        try:
            retweets = int(rc)
        except ValueError:
            raise CorpusError(f"row {i}, column 'retweet_count': not an integer {rc!r}") from None
        try:
            coord = parse_coord(get(row, "tweet_coord"))
        except ValueError as exc:
            raise CorpusError(f"row {i}, column 'tweet_coord': {exc}") from None
        created_cell = get(row, "tweet_created")
        created = parse_timestamp(created_cell)
        if created_cell and created is None:
            logger.warning("row %d: unparseable timestamp %r kept as absent", i, created_cell)
        try:
            rec = TweetRecord(
                label=label,
                text_raw=get(row, "text"),
                airline=get(row, "airline"),
                user_name=get(row, "name"),
                retweet_count=retweets,
                tweet_coord=coord,
                created_at=created,
                location=get(row, "tweet_location") or None,
                timezone=get(row, "user_timezone") or None,
            )
        except CorpusError as exc:
            raise CorpusError(f"row {i}: {exc}") from None
        records.append(rec)
    return records


def load_records(path, policy=None):
    """Convenience: load the public CSV and prune it in one step."""
    corpus = load_corpus(path)
    return prune_columns(corpus, policy)
