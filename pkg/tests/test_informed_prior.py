from dataclasses import replace

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from recallwatch.informed_prior import (
    FeatureClassCounts,
    PredictedCorpus,
    apply_transform,
    apply_transform_matrix,
    compute_transform,
    feature_class_counts,
    fit_informed,
    fit_informed_featurized,
    predict_matrix,
    predict_unlabeled,
    read_transform,
    smoothed_conditional,
    write_transform,
)
from recallwatch.linmodel import FitParams, LinearModel, predict_proba_many
from recallwatch.pu_train import FeaturizedPU, PUConfig
from recallwatch.synthgen import generate
from recallwatch.vectorizer import SparseVector, vectorize_many


def transform_for(theta, n1, n0):
    model = LinearModel(np.asarray(theta, float))
    return compute_transform(model, FeatureClassCounts(np.asarray(n1), np.asarray(n0)))


# smoothing -------------------------------------------------------------------

def test_smoothing_values():
    assert smoothed_conditional(0, 0) == (0.5, 0.5)
    p1, p0 = smoothed_conditional(3, 1)
    assert p1 == pytest.approx(2 / 3, abs=1e-12) and p0 == pytest.approx(1 / 3, abs=1e-12)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_smoothing_open_interval(n1, n0):
    p1, p0 = smoothed_conditional(n1, n0)
    assert 0 < p1 < 1 and 0 < p0 < 1
    assert p1 + p0 == pytest.approx(1.0)


def test_smoothing_rejects_negative_counts():
    with pytest.raises(ValueError):
        smoothed_conditional(-1, 2)


# transform ------------------------------------------------------------------

def test_hand_worked_transform():
    t = transform_for([0.7, 0.1, -0.4], n1=[2, 0, 2], n0=[6, 8, 1])
    np.testing.assert_allclose(t.p1[:2], [0.3, 0.1])
    assert t.p0[2] == pytest.approx(0.4)
    np.testing.assert_allclose([t.p1_hat[0], t.p1_hat[1], t.p0_hat[2]], [0.75, 0.25, 1.0], atol=1e-12)
    assert t.rho == pytest.approx(1.5)
    np.testing.assert_allclose(t.factor, [1.125, 0.375, 1.5], atol=1e-12)


def test_symmetric_counts_give_unit_factors():
    t = transform_for([1.0, 2.0, -1.0, -3.0], n1=[4, 4, 0, 0], n0=[0, 0, 4, 4])
    np.testing.assert_allclose(t.factor, 1.0, atol=1e-12)


def test_zero_coefficient_joins_positive_group():
    t = transform_for([0.0, -1.0], n1=[1, 1], n0=[1, 1])
    assert t.positive.tolist() == [True, False]


def test_single_group_rho():
    t = transform_for([1.0, 1.0, 1.0, 1.0], n1=[1, 5, 0, 2], n0=[3, 0, 0, 2])
    assert t.rho == 4.0
    assert t.factor.mean() == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_transform_invariants(data):
    k = data.draw(st.integers(1, 40))
    theta = data.draw(st.lists(st.floats(-5, 5), min_size=k, max_size=k))
    n1 = data.draw(st.lists(st.integers(0, 500), min_size=k, max_size=k))
    n0 = data.draw(st.lists(st.integers(0, 500), min_size=k, max_size=k))
    t = transform_for(theta, n1, n0)
    pos = t.positive
    if pos.any():
        assert abs(t.p1_hat[pos].sum() - 1) < 1e-9
    if (~pos).any():
        assert abs(t.p0_hat[~pos].sum() - 1) < 1e-9
    # rho from its definition
    denom = t.p1_hat[pos].sum() + t.p0_hat[~pos].sum()
    assert t.rho == pytest.approx(k / denom, rel=1e-9)
    if pos.any() and (~pos).any():
        assert t.rho == pytest.approx(k / 2)
    assert np.all(t.factor > 0)
    assert t.factor.sum() == pytest.approx(t.rho * denom, rel=1e-9)


def test_factor_mean_is_one_with_both_groups():
    rng = np.random.default_rng(1)
    for _ in range(20):
        k = int(rng.integers(2, 60))
        theta = rng.normal(size=k)
        theta[:2] = [1.0, -1.0]
        t = transform_for(theta, rng.integers(0, 100, k), rng.integers(0, 100, k))
        assert abs(t.factor.mean() - 1.0) < 1e-12


def test_apply_transform_examples():
    t = transform_for([0.7, 0.1, -0.4], n1=[2, 0, 2], n0=[6, 8, 1])
    x = apply_transform(SparseVector((0, 2), (1.0, 1.0), 3), t)
    assert x.indices == (0, 2) and x.values == pytest.approx((1.125, 1.5))
    assert apply_transform(SparseVector((), (), 3), t).values == ()

    object.__setattr__(t, "factor", np.array([2.0, 9.9, 0.5]))
    assert apply_transform(SparseVector((0, 2), (1.0, 1.0), 3), t).values == (2.0, 0.5)


def test_apply_transform_rejects_bad_input():
    t = transform_for([1.0, -1.0], [1, 1], [1, 1])
    with pytest.raises(ValueError, match="binary"):
        apply_transform(SparseVector((0,), (2.0,), 2), t)
    with pytest.raises(ValueError):
        apply_transform(SparseVector((0,), (1.0,), 3), t)
    with pytest.raises(ValueError):
        apply_transform_matrix(sp.csr_matrix([[0.5, 0.0]]), t)


def test_matrix_and_vector_forms_agree():
    rng = np.random.default_rng(0)
    X = sp.csr_matrix((rng.random((15, 6)) < 0.4).astype(float))
    t = transform_for(rng.normal(size=6), rng.integers(0, 20, 6), rng.integers(0, 20, 6))
    Xt = apply_transform_matrix(X, t).toarray()
    np.testing.assert_array_equal(Xt, X.toarray() * t.factor)


# counts and prediction -------------------------------------------------------

def test_counts_match_brute_force_recount():
    rng = np.random.default_rng(7)
    X = (rng.random((50, 9)) < 0.3).astype(float)
    labels = rng.integers(0, 2, 50)
    pred = PredictedCorpus([str(i) for i in range(50)], sp.csr_matrix(X), labels)
    c = feature_class_counts(pred)
    for j in range(9):
        assert c.n1[j] == sum(1 for i in range(50) if X[i, j] and labels[i] == 1)
        assert c.n0[j] == sum(1 for i in range(50) if X[i, j] and labels[i] == 0)


def test_count_totals_equal_document_frequency(small_world):
    w = small_world
    pred = w.fit.predicted
    c = feature_class_counts(pred, w.vocab.k)
    # doc_freq comes from the same reviews corpus the predictions cover
    np.testing.assert_array_equal(c.n1 + c.n0, w.vocab.doc_freq_array())
    assert len(pred.ids) == len(w.sc.reviews)


def test_predicted_labels_cover_all_of_u(small_world):
    w = small_world
    # every review gets a label, not only the sampled negatives
    assert w.fit.predicted.labels.shape == (len(w.sc.reviews),)
    assert len(w.fit.training_set.sampled_ids) < len(w.sc.reviews)


def test_predict_unlabeled_extremes(small_world):
    w = small_world
    everyone = predict_unlabeled(LinearModel.zeros(w.vocab.k), w.sc.reviews, w.vocab)
    assert everyone.labels.min() == 1
    nobody = predict_unlabeled(LinearModel(np.zeros(w.vocab.k), -50.0), w.sc.reviews, w.vocab)
    assert nobody.labels.max() == 0


def test_threshold_tie_counts_positive():
    pred = predict_matrix(LinearModel.zeros(2), ["a"], sp.csr_matrix((1, 2)))
    assert pred.labels.tolist() == [1]


# synthetic worlds ----------------------------------------------------------

def test_bias_factor_below_hazard_factors(small_world):
    w = small_world
    t = w.fit.transform
    terms = w.vocab.terms
    hazard = [t.factor[terms[h]] for h in w.sc.hazard_tokens if h in terms]
    bias = [t.factor[terms[b]] for b in w.sc.bias_tokens if b in terms]
    assert hazard and bias
    assert max(bias) < min(hazard)


def test_bias_token_shift_between_training_and_u(small_world):
    w = small_world
    j = w.vocab.terms["crib"]
    rows = w.fit.training_set.rows
    has = rows.X[:, j].toarray().ravel() > 0
    # weighted share of training rows with the token that are positive
    share = rows.w[has & (rows.y == 1)].sum() / rows.w[has].sum()
    assert share > 0.5
    pred = w.fit.predicted
    in_u = pred.X[:, j].toarray().ravel() > 0
    assert pred.labels[in_u].mean() < 0.25


def test_informed_refit_uses_transformed_rows(small_world):
    w = small_world
    t, rows = w.fit.transform, w.fit.training_set.rows
    Xt = apply_transform_matrix(rows.X, t)
    np.testing.assert_allclose(Xt.sum(axis=1).A.ravel(), rows.X @ t.factor)


def test_pipeline_is_deterministic(small_world):
    w = small_world
    again = fit_informed_featurized(w.data, w.pu, FitParams())
    np.testing.assert_array_equal(again.transform.factor, w.fit.transform.factor)
    np.testing.assert_array_equal(again.informed.theta, w.fit.informed.theta)


def test_corpus_level_entry_point(small_world):
    w = small_world
    base, t, informed = fit_informed(w.sc.complaints, w.sc.reviews, w.vocab, w.pu)
    np.testing.assert_array_equal(informed.theta, w.fit.informed.theta)
    assert t.rho == w.fit.transform.rho


def test_no_shift_control(small_world):
    # U is exactly the training negatives plus the complaints; complaints carry
    # rating 0 so they are never sampled as negatives
    w = small_world
    neg = np.array([w.data.unlabeled_ids.index(i) for i in w.fit.training_set.sampled_ids])
    data = FeaturizedPU(
        positive_ids=w.data.positive_ids,
        XL=w.data.XL,
        unlabeled_ids=w.data.positive_ids + [w.data.unlabeled_ids[i] for i in neg],
        XU=sp.vstack([w.data.XL, w.data.XU[neg]], format="csr"),
        ratings=np.r_[np.zeros(len(w.data.positive_ids), np.int64), w.data.ratings[neg]],
    )
    res = fit_informed_featurized(data, PUConfig(tau=w.pu.tau, s=neg.size, seed=0), FitParams())
    assert sorted(res.training_set.sampled_ids) == sorted(w.fit.training_set.sampled_ids)
    # held-out documents from the same distribution: an independently seeded
    # draw of complaints and top-rated reviews
    other = generate(replace(w.sc.config, seed=w.sc.config.seed + 100))
    held_out = list(other.complaints) + [d for d in other.reviews if d.star_rating >= w.pu.tau]
    X = vectorize_many(held_out, w.vocab)
    base = predict_proba_many(res.baseline, X) >= 0.5
    informed = predict_proba_many(res.informed, apply_transform_matrix(X, res.transform)) >= 0.5
    assert np.mean(base == informed) >= 0.95


def test_transform_file_round_trip(small_world, tmp_path):
    w = small_world
    write_transform(w.fit.transform, w.vocab, tmp_path / "t.csv")
    back = read_transform(w.vocab, tmp_path / "t.csv")
    np.testing.assert_array_equal(back.factor, w.fit.transform.factor)
    np.testing.assert_array_equal(back.positive, w.fit.transform.positive)
    assert back.rho == w.fit.transform.rho
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == "term,group,n_j1,n_j0,p,p_hat,factor"


@pytest.mark.slow
def test_informed_predicted_rate_near_prior(default_worlds):
    for w in default_worlds:
        pi = w.sc.config.hazard_rate
        Xu = apply_transform_matrix(w.data.XU, w.fit.transform)
        rate = np.mean(predict_proba_many(w.fit.informed, Xu) >= 0.5)
        assert 0.5 * pi <= rate <= 1.5 * pi, (w.sc.config.seed, rate)
