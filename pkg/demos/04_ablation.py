# %% [markdown]
# # TextOnly versus Extended
#
# The harness splits once, fits every transform on the training rows only,
# and scores each (model, feature set) cell against the majority baseline.
# With the public CSV and GloVe vectors in data/, set USE_REAL = True.

# %%
import os
import tempfile
from pathlib import Path

from tweetsat import synthetic
from tweetsat.corpus import load_records
from tweetsat.embedding import load_embeddings
from tweetsat.evalharness import ExperimentPlan, format_improvement, run_experiment

USE_REAL = False

if USE_REAL:
    csv_path = Path(os.environ.get("TWEETSAT_CSV", "data/Tweets.csv"))
    glove_path = Path(os.environ.get("TWEETSAT_GLOVE", "data/glove.6B.50d.txt"))
    plan = ExperimentPlan(seed=42, pca_k=7)
else:
    tmp = Path(tempfile.mkdtemp())
    csv_path, glove_path = tmp / "tweets.csv", tmp / "glove.txt"
    synthetic.write_corpus(csv_path, n=1500, seed=3)
    synthetic.write_embeddings(glove_path, dim=50, seed=0)
    plan = ExperimentPlan(models=("SVM", "V1", "V4"), seed=42, pca_k=7, mlp_epochs=20)

records = load_records(csv_path)
table = load_embeddings(glove_path, 50)

# %%
report = run_experiment(records, table, plan)
print(format_improvement(report))

# %%
for cell in report["cells"]:
    print(f"{cell['model']:4s} {cell['feature_set']:9s} acc {cell['accuracy']:.4f}  macro-F1 {cell['macro_f1']:.4f}")
print("timing (s):", round(report["timing"]["total_seconds"], 1))
