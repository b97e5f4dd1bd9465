"""Hand-traced cleaning goldens and properties.

Each GOLDEN row was traced by hand through the five steps: URL removal,
retweet-tail removal, username removal, hashtag removal, and double-space
collapse (repeated until no double space is left) applied to both outputs.
"""
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tweetsat.textclean import (
    URL_PATTERN,
    clean_tweet,
    collapse_spaces,
    remove_hashtags,
    remove_retweets,
    remove_urls,
    remove_usernames,
)

# (input, no_url, filtered)
GOLDEN = [
    ("Fly @delta to NYC http://d.l/xy", "Fly @delta to NYC ", "Fly to NYC "),
    ("RT @user: worst flight ever", "RT @user: worst flight ever", ""),
    ("", "", ""),
    ("see http://t.co/ab12 now", "see now", "see now"),
    ("@united thanks for the great service!", "@united thanks for the great service!", " thanks for the great service!"),
    ("@VirginAmerica @united worst #fail", "@VirginAmerica @united worst #fail", " worst "),
    ("a    b", "a b", "a b"),
    ("a   b", "a b", "a b"),
    ("@united @AmericanAir @delta why", "@united @AmericanAir @delta why", " why"),
    ("Great flight.Thanks @SouthwestAir", "Great @SouthwestAir", "Great "),
    ("@AmericanAir flight 1.5hrs late...", "@AmericanAir flight 1.5hrs ", " flight 1.5hrs "),
    ("Thanks #JetBlue #love", "Thanks #JetBlue #love", "Thanks "),
    ("@united why? http://t.co/abc123XYZ", "@united why? ", " why? "),
    ("Check https://www.united.com/flight?id=42 pls", "Check pls", "Check pls"),
    (
        "RT @JetBlue: Our fleet's on fleek. http://t.co/XYZ",
        "RT @JetBlue: Our fleet's on fleek. ",
        "",
    ),
    ("I love #travel.Really", "I love ", "I love "),
    ("Email me at bob@mail.com now", "Email me at now", "Email me at now"),
    ("Not RT @someone but rt @x", "Not RT @someone but rt @x", "Not "),
    ("line one RT @a\nline two @b", "line one RT @a\nline two @b", "line one \nline two "),
    ("@user_name_1 hi", "@user_name_1 hi", " hi"),
    ("#tag1#tag2 x", "#tag1#tag2 x", " x"),
    ("hi @josé!", "hi @josé!", "hi é!"),
    ("a  b  c", "a b c", "a b c"),
    ("  leading and trailing  ", " leading and trailing ", " leading and trailing "),
    ("3.14 is pi", "3.14 is pi", "3.14 is pi"),
    ("so ok... thanks", "so thanks", "so thanks"),
    ("U.S. flights", "U.S. flights", "U.S. flights"),
    (
        "Delayed 2hrs!! @AmericanAir #fail http://t.co/x1",
        "Delayed 2hrs!! @AmericanAir #fail ",
        "Delayed 2hrs!! ",
    ),
]


@pytest.mark.parametrize("text, no_url, filtered", GOLDEN)
def test_golden(text, no_url, filtered):
    out = clean_tweet(text)
    assert out.no_url == no_url
    assert out.filtered == filtered


@pytest.mark.parametrize(
    "text, expected",
    [("see http://t.co/ab12 now", "see  now"), ("", ""), ("no links here", "no links here")],
)
def test_remove_urls(text, expected):
    assert remove_urls(text) == expected


def test_collapse_modes():
    assert collapse_spaces("a    b") == "a b"
    assert collapse_spaces("a    b", single_pass=True) == "a  b"
    assert collapse_spaces("a   b", single_pass=True) == "a  b"


def test_single_pass_is_not_idempotent_on_long_runs():
    text = "Delayed 2hrs!! @AmericanAir #fail http://t.co/x1"
    once = clean_tweet(text, single_pass=True).filtered
    assert once == "Delayed 2hrs!!  "
    assert clean_tweet(once, single_pass=True).filtered != once
    assert clean_tweet(text).filtered == "Delayed 2hrs!! "


word = st.text(alphabet="abcdefghXYZ019_", min_size=1, max_size=8)
token = st.one_of(
    word,
    word.map(lambda w: "@" + w),
    word.map(lambda w: "#" + w),
    word.map(lambda w: f"http://t.co/{w}{w}"),
    st.tuples(word, word).map(lambda p: f"{p[0]}.{p[1]}"),
    st.sampled_from(["!", "?", "...", "&amp;", "it's", "3.5", "é"]),
)
sep = st.sampled_from([" ", " ", " ", "  ", "   ", "\n"])
tweets = st.builds(
    lambda rt, toks, seps: rt + "".join(t + s for t, s in zip(toks, seps)),
    st.sampled_from(["", "", "RT @someone: "]),
    st.lists(token, max_size=12),
    st.lists(sep, min_size=12, max_size=12),
)


@settings(max_examples=500, deadline=None)
@given(tweets)
def test_idempotent_on_filtered_output(text):
    f = clean_tweet(text).filtered
    assert clean_tweet(f).filtered == f
    assert "  " not in f


@settings(max_examples=500, deadline=None)
@given(tweets)
def test_single_pass_recleaning_only_touches_whitespace(text):
    f = clean_tweet(text, single_pass=True).filtered
    g = clean_tweet(f, single_pass=True).filtered
    assert collapse_spaces(g) == collapse_spaces(f)


@settings(max_examples=500, deadline=None)
@given(tweets.filter(lambda t: re.search(URL_PATTERN, t) is None))
def test_no_url_is_input_modulo_collapse_when_no_url(text):
    assert clean_tweet(text).no_url == collapse_spaces(text)


@settings(max_examples=500, deadline=None)
@given(tweets)
def test_filtered_recomposes_from_no_url(text):
    raw_no_url = remove_urls(text)
    rebuilt = collapse_spaces(remove_hashtags(remove_usernames(remove_retweets(raw_no_url))))
    out = clean_tweet(text)
    assert out.filtered == rebuilt
    assert out.no_url == collapse_spaces(raw_no_url)


@settings(max_examples=500, deadline=None)
@given(tweets)
def test_outputs_have_no_urls_or_tags(text):
    out = clean_tweet(text)
    assert re.search(URL_PATTERN, out.filtered) is None
    assert re.search(URL_PATTERN, out.no_url) is None
    assert re.search(r"@\w", out.filtered, re.ASCII) is None
    assert re.search(r"#\w", out.filtered, re.ASCII) is None
    assert "RT @" not in out.filtered


@pytest.mark.parametrize(
    "text, filtered",
    [
        # retweet rule needs one character after "@"
        ("RT @", "RT @"),
        # URL removal joins "RT " and " @" into a fresh marker after the retweet step ran
        ("RT @ab.RT @ ", "RT @ "),
    ],
)
def test_known_rt_remnants(text, filtered):
    assert clean_tweet(text).filtered == filtered
