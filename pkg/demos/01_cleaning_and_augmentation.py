# %% [markdown]
# # Cleaning and augmenting tweets
#
# Two cleaned views come out of every tweet: one with links stripped, and a
# "filtered" one that also drops retweet prefixes, @mentions and hashtags.
# The CNN trains on an augmented copy of the training split.

# %%
import tempfile
from pathlib import Path

from tweetsat import synthetic
from tweetsat.augment import AugmentConfig, build_augmented_dataset
from tweetsat.corpus import load_records
from tweetsat.embedding import load_embeddings
from tweetsat.textclean import clean_tweet

# %%
for raw in [
    "@united thanks for nothing #fail http://t.co/x1",
    "RT @JetBlue: Our fleet's cool.",
    "Delayed 2hrs!! @AmericanAir #fail http://t.co/x1",
]:
    out = clean_tweet(raw)
    print(repr(raw))
    print("   no_url:  ", repr(out.no_url))
    print("   filtered:", repr(out.filtered))

# %% [markdown]
# The retweet rule deletes from "RT @" to the end of the line, so a
# retweet loses its whole quoted body. Cleaning is a fixpoint: running it
# again over its own output changes nothing.

# %%
print(repr(clean_tweet("so late RT @a: quoted body #x").filtered))
once = clean_tweet("so   late  #x @bob").filtered
print(repr(once), clean_tweet(once).filtered == once)

# %% [markdown]
# Augmentation mixes progressive truncations, nearest-neighbour word swaps
# and sentence-level edits. A small synthetic corpus and embedding table
# stand in for the public data here.

# %%
tmp = Path(tempfile.mkdtemp())
synthetic.write_corpus(tmp / "tweets.csv", n=200, seed=1)
synthetic.write_embeddings(tmp / "glove.txt", dim=50, seed=0)
records = load_records(tmp / "tweets.csv")
table = load_embeddings(tmp / "glove.txt", 50)

result = build_augmented_dataset(records[:50], table, AugmentConfig(target_factor=3, seed=42))
print(len(result), "samples from 50 records")
for s in result.samples[:8]:
    print(f"{s.origin:13s} {s.label}  {s.text}")

# %%
from collections import Counter

print(Counter(s.origin for s in result))
