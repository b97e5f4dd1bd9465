# %% [markdown]
# # Text vectors, PCA and the extended features
#
# Each tweet becomes the mean of its word vectors. PCA (a Jacobi
# eigensolver, no LAPACK) squeezes those down to k components, and the
# extended feature set appends airline, time, location and retweet context.

# %%
import tempfile
from pathlib import Path

import numpy as np

from tweetsat import synthetic
from tweetsat.corpus import load_records
from tweetsat.embedding import doc_vectors, load_embeddings
from tweetsat.evalharness import record_texts
from tweetsat.features import (
    assemble,
    encode_extended_matrix,
    fit_extended_context,
    normalize_apply,
    normalize_fit,
    pca_fit,
    pca_transform,
)

tmp = Path(tempfile.mkdtemp())
synthetic.write_corpus(tmp / "tweets.csv", n=500, seed=2)
synthetic.write_embeddings(tmp / "glove.txt", dim=50, seed=0)
records = load_records(tmp / "tweets.csv")
table = load_embeddings(tmp / "glove.txt", 50)

# %%
V = doc_vectors(record_texts(records), table)
print(V.shape)

pca = pca_fit(V, 7)
Z = pca_transform(pca, V)
print("explained variance:", np.round(pca.eigenvalues, 4))
print("orthonormality error:", np.abs(pca.components @ pca.components.T - np.eye(7)).max())

# %% [markdown]
# Compare with numpy's symmetric eigensolver on the sample covariance. Eigenvalues match; vectors
# match up to sign, which the library pins down deterministically.

# %%
w = np.linalg.eigvalsh(np.cov(V, rowvar=False, bias=False))[::-1][:7]
print(np.abs(w - pca.eigenvalues).max())

# %%
ctx = fit_extended_context(records)
E = encode_extended_matrix(records, ctx)
fm = assemble(Z, E, "Extended", extended_names=ctx.names)
print(fm.values.shape, fm.column_names[:12])

nrm = normalize_fit(fm.values)
X = normalize_apply(nrm, fm.values)
print(X.min(), X.max())
