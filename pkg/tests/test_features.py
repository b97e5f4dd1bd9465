import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tweetsat.embedding import doc_vectors
from tweetsat.features import (
    EXTENDED,
    TEXT_ONLY,
    FeatureError,
    FeatureMatrix,
    assemble,
    encode_extended,
    fit_extended_context,
    jacobi_eigh,
    normalize_apply,
    normalize_fit,
    pca_fit,
    pca_transform,
    read_matrix,
    write_matrix,
)
from tweetsat.textclean import clean_tweet

from .conftest import make_record


def eigh_oracle(X):
    """Eigenpairs of the sample covariance from numpy's LAPACK solver, descending."""
    cov = np.cov(np.asarray(X, dtype=np.float64), rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    vals, vecs = np.linalg.eigh(cov)
    return vals[::-1], vecs[:, ::-1]


def eigen_groups(vals, tol):
    """Split descending eigenvalues into runs whose neighbours differ by <= tol."""
    groups = [[0]]
    for i in range(1, len(vals)):
        if abs(vals[i - 1] - vals[i]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def check_against_oracle(X, k, atol=1e-6):
    model = pca_fit(X, k)
    vals, vecs = eigh_oracle(X)
    np.testing.assert_allclose(model.mean, X.mean(axis=0), atol=atol)
    np.testing.assert_allclose(model.eigenvalues, vals[:k], atol=atol)
    Z = pca_transform(model, X)
    Zo = (X - X.mean(axis=0)) @ vecs
    C = model.components
    for g in eigen_groups(vals, 1e-7 * max(1.0, abs(vals[0]))):
        inside = [i for i in g if i < k]
        if not inside:
            continue
        basis = vecs[:, g]
        P = basis @ basis.T
        if len(g) == 1:
            # simple eigenvalue: direction and transform column match up to sign
            i = g[0]
            s = np.sign(C[i] @ basis[:, 0]) or 1.0
            np.testing.assert_allclose(C[i], s * basis[:, 0], atol=atol)
            np.testing.assert_allclose(Z[:, i], s * Zo[:, i], atol=atol)
        else:
            # repeated eigenvalue: only the spanned subspace is defined
            for i in inside:
                np.testing.assert_allclose(P @ C[i], C[i], atol=atol)
            if len(inside) == len(g):
                np.testing.assert_allclose(
                    np.sum(Z[:, inside] ** 2, axis=1), np.sum(Zo[:, g] ** 2, axis=1), atol=atol
                )
    return model


def test_pca_oracle_fuzz():
    rng = np.random.default_rng(20240601)
    for trial in range(500):
        n = int(rng.integers(2, 7))
        d = int(rng.integers(1, 5))
        kind = trial % 5
        if kind == 0:
            X = rng.normal(size=(n, d))
        elif kind == 1:
            X = rng.integers(-3, 4, size=(n, d)).astype(float)  # ties and repeats
        elif kind == 2:
            X = np.repeat(rng.normal(size=(1, d)), n, axis=0)  # all rows equal
        elif kind == 3:
            X = rng.normal(size=(n, 1)) @ rng.normal(size=(1, d))  # rank one
        else:
            X = rng.normal(scale=100.0, size=(n, d))
        k = int(rng.integers(1, d + 1))
        check_against_oracle(X, k)


def test_pca_analytic_example():
    m = pca_fit([[0, 0], [1, 1], [2, 2]], 1)
    np.testing.assert_allclose(m.components, [[1 / math.sqrt(2), 1 / math.sqrt(2)]], atol=1e-12)
    np.testing.assert_allclose(m.eigenvalues, [2.0], atol=1e-12)


def test_pca_identical_rows_warns(caplog):
    m = pca_fit(np.ones((4, 3)), 1)
    assert m.eigenvalues[0] == 0.0
    assert "identical" in caplog.text
    np.testing.assert_allclose(m.components @ m.components.T, [[1.0]])


def test_pca_random_5x3_full():
    X = np.random.default_rng(7).normal(size=(5, 3))
    check_against_oracle(X, 3, atol=1e-8)


def test_pca_errors():
    with pytest.raises(FeatureError, match="k=0"):
        pca_fit(np.zeros((3, 2)), 0)
    with pytest.raises(FeatureError, match="k=3"):
        pca_fit(np.zeros((3, 2)), 3)
    with pytest.raises(FeatureError, match="2 rows"):
        pca_fit(np.zeros((1, 2)), 1)
    m = pca_fit(np.random.default_rng(0).normal(size=(5, 3)), 2)
    with pytest.raises(FeatureError, match="3 columns"):
        pca_transform(m, np.zeros((2, 4)))


def test_jacobi_matches_eigh_on_larger_matrices():
    rng = np.random.default_rng(1)
    for d in (5, 17, 50):
        A = rng.normal(size=(d, d))
        S = A + A.T
        vals, vecs = jacobi_eigh(S)
        np.testing.assert_allclose(np.sort(vals), np.linalg.eigvalsh(S), atol=1e-10)
        np.testing.assert_allclose(S @ vecs, vecs * vals, atol=1e-9)


def test_sign_convention_first_nonzero_positive():
    X = np.random.default_rng(3).normal(size=(30, 6))
    C = pca_fit(X, 6).components
    for row in C:
        first = row[np.flatnonzero(np.abs(row) > 1e-12)[0]]
        assert first > 0


@settings(max_examples=200, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 6)),
           elements=st.floats(-1e3, 1e3, allow_nan=False, width=32)),
    st.data(),
)
def test_pca_invariants(X, data):
    n, d = X.shape
    k = data.draw(st.integers(1, d))
    m = pca_fit(X, k)
    C = m.components
    assert np.abs(C @ C.T - np.eye(k)).max() < 1e-8
    assert np.all(np.diff(m.eigenvalues) <= 1e-9 * max(1.0, abs(m.eigenvalues[0])))
    assert np.all(m.eigenvalues >= -1e-12 * max(1.0, abs(m.eigenvalues[0])))
    Z = pca_transform(m, X)
    total_in = np.var(X, axis=0, ddof=1).sum()
    total_out = np.var(Z, axis=0, ddof=1).sum()
    assert total_out <= total_in + 1e-8 * max(1.0, total_in)
    np.testing.assert_allclose(pca_transform(m, m.mean[None, :]), np.zeros((1, k)), atol=1e-9)


def test_transform_variances_and_distances():
    X = np.random.default_rng(11).normal(size=(40, 5)) @ np.diag([5, 3, 2, 1, 0.5])
    m = pca_fit(X, 5)
    Z = pca_transform(m, X)
    np.testing.assert_allclose(np.var(Z, axis=0, ddof=1), m.eigenvalues, rtol=1e-10)
    dx = np.linalg.norm(X[:, None] - X[None], axis=-1)
    dz = np.linalg.norm(Z[:, None] - Z[None], axis=-1)
    assert np.abs(dx - dz).max() < 1e-8


def test_orthonormal_on_synthetic_text_features(synth_records, synth_table):
    texts = [clean_tweet(r.text_raw).filtered for r in synth_records]
    V = doc_vectors(texts, synth_table)
    for k in (1, 7, 50):
        C = pca_fit(V, k).components
        assert np.abs(C @ C.T - np.eye(k)).max() < 1e-8


def test_normalizer_examples():
    nrm = normalize_fit(np.array([[0.0, 3.0], [5.0, 3.0], [10.0, 3.0]]))
    out = normalize_apply(nrm, np.array([[0.0, 3.0], [5.0, 3.0], [10.0, 3.0]]))
    np.testing.assert_array_equal(out, [[0, 0], [0.5, 0], [1, 0]])
    np.testing.assert_array_equal(normalize_apply(nrm, np.array([[12.0, 9.0], [-1.0, 3.0]])), [[1, 0], [0, 0]])


@given(arrays(np.float64, st.tuples(st.integers(1, 10), st.integers(1, 4)),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_normalized_training_columns_in_unit_interval(X):
    nrm = normalize_fit(X)
    assert np.all(nrm.max >= nrm.min)
    out = normalize_apply(nrm, X)
    assert out.min() >= 0.0 and out.max() <= 1.0


AIRLINES = ["American", "Delta", "Southwest", "US Airways", "United", "Virgin America"]


def test_extended_airline_one_hot_and_hour():
    train = [make_record(airline=a) for a in AIRLINES]
    ctx = fit_extended_context(train)
    ts = dt.datetime(2015, 2, 23, 0, 5, tzinfo=dt.timezone.utc)  # a Monday
    vec, names = encode_extended(make_record(airline="American", created_at=ts), ctx)
    assert list(vec[:6]) == [1, 0, 0, 0, 0, 0]
    got = dict(zip(names, vec))
    assert (got["hour_sin"], got["hour_cos"]) == (0.0, 1.0)
    assert (got["dow_sin"], got["dow_cos"]) == (0.0, 1.0)


def test_extended_unseen_defaults():
    train = [
        make_record(user_name="ann", timezone="Quito", tweet_coord=(1.0, 2.0)),
        make_record(user_name="ann", timezone="Quito", tweet_coord=(3.0, 4.0)),
    ]
    ctx = fit_extended_context(train)
    vec, names = encode_extended(make_record(user_name="zed", timezone="Mars"), ctx)
    got = dict(zip(names, vec))
    assert got["user_freq"] == 0.0
    assert got["tz=OTHER"] == 1.0 and got["tz=Quito"] == 0.0
    assert (got["coord_lat"], got["coord_lon"]) == (0.0, 0.0)
    assert got["retweets"] == 0.0
    # known user and timezone, coordinate filled from the timezone centroid
    vec, _ = encode_extended(make_record(user_name="ann", timezone="Quito", retweet_count=3), ctx)
    got = dict(zip(names, vec))
    assert got["user_freq"] == pytest.approx(math.log(3))
    assert (got["coord_lat"], got["coord_lon"]) == (2.0, 3.0)
    assert got["retweets"] == pytest.approx(math.log(4))
    assert got["tz=OTHER"] == 0.0


def test_assemble_modes():
    text = np.arange(14.0).reshape(2, 7)
    ext = np.ones((2, 4))
    fm = assemble(text, ext, EXTENDED)
    assert fm.values.shape == (2, 11) and fm.feature_set == EXTENDED
    np.testing.assert_array_equal(fm.values[:, :7], text)
    t = assemble(text, ext, TEXT_ONLY)
    assert t.values.shape == (2, 7) and t.column_names == [f"pc{i}" for i in range(1, 8)]
    with pytest.raises(FeatureError, match="row mismatch"):
        assemble(text, np.ones((3, 4)), EXTENDED)
    with pytest.raises(FeatureError, match="unique"):
        assemble(text, ext, EXTENDED, extended_names=["pc1", "a", "b", "c"])
    with pytest.raises(FeatureError, match="non-finite"):
        FeatureMatrix(np.array([[np.nan]]), ["a"], TEXT_ONLY)


def test_matrix_file_roundtrip(tmp_path):
    vals = np.random.default_rng(0).normal(size=(5, 3))
    fm = FeatureMatrix(vals, ["pc1", "airline=US Airways", "tz=Arizona, USA"], EXTENDED)
    p = tmp_path / "m.csv"
    write_matrix(fm, p, labels=np.array([0, 1, 2, 1, 0]))
    back, names, labels = read_matrix(p)
    np.testing.assert_array_equal(back, vals)
    assert names == fm.column_names
    assert list(labels) == [0, 1, 2, 1, 0]
