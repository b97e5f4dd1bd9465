"""Tweet text cleaning: URL removal and the fully filtered variant.

The URL expression keeps its odd leading character class on purpose. That
class contains ``h t p s : /`` so it still consumes ``http://host.tld/...``,
and it also consumes any dotted run such as ``late...`` or ``flight.Thanks``.
Downstream goldens depend on this exact behaviour.
"""
import re
from dataclasses import dataclass

URL_PATTERN = r"[(http(s)?):\/\/(www\.)?a-zA-Z0-9@:%._\+~#=]{2,256}\.[a-z\/A-Z0-9=@:%_+.~#?&]{2,256}"
RETWEET_PATTERN = r"RT @.+"
USERNAME_PATTERN = r"@\w+"
HASHTAG_PATTERN = r"#\w+"

_URL_RE = re.compile(URL_PATTERN, re.ASCII)
_RT_RE = re.compile(RETWEET_PATTERN, re.ASCII)
_USER_RE = re.compile(USERNAME_PATTERN, re.ASCII)
_HASH_RE = re.compile(HASHTAG_PATTERN, re.ASCII)


@dataclass(frozen=True)
class CleanedTweet:
    no_url: str
    filtered: str


def remove_urls(text: str) -> str:
    return _URL_RE.sub("", text)


def remove_retweets(text: str) -> str:
    return _RT_RE.sub("", text)


def remove_usernames(text: str) -> str:
    return _USER_RE.sub("", text)


def remove_hashtags(text: str) -> str:
    return _HASH_RE.sub("", text)


def collapse_spaces(text: str, single_pass: bool = False) -> str:
    """Replace double spaces with single ones until none remain.

    ``single_pass=True`` runs the replacement once, so four spaces become
    two; that literal form is not idempotent on its own output.
    """
    out = text.replace("  ", " ")
    if not single_pass:
        while "  " in out:
            out = out.replace("  ", " ")
    return out


def clean_tweet(text: str, single_pass: bool = False) -> CleanedTweet:
    no_url = remove_urls(text)
    filtered = remove_retweets(no_url)
    filtered = remove_usernames(filtered)
    filtered = remove_hashtags(filtered)
    return CleanedTweet(
        no_url=collapse_spaces(no_url, single_pass),
        filtered=collapse_spaces(filtered, single_pass),
    )
