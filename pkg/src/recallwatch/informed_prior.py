"""Informed-prior feature re-scaling.

A baseline classifier labels every unlabeled review.  For each feature we
estimate, from those predicted labels, how often documents containing it are
hazardous; features the baseline weights positively get values proportional
to that rate, negatively weighted features proportional to the complementary
rate.  Values are scaled to average 1 and the classifier is refit on the
re-valued training rows.  Because fitting uses L2 and no standardization, a
larger feature value means a weaker effective penalty on that feature.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus
from .linmodel import FitParams, LinearModel, WeightedDataset, fit, predict_proba_many
from .pu_train import FeaturizedPU, PUConfig, TrainingSet, featurize, training_set_from
from .vectorizer import SparseVector, Vocabulary, vectorize_many


@dataclass(frozen=True)
class PredictedCorpus:
    ids: list[str]
    X: sp.csr_matrix
    labels: np.ndarray
    decision_threshold: float = 0.5
    scores: np.ndarray | None = None

    @property
    def pairs(self) -> list[tuple[str, int]]:
        return list(zip(self.ids, self.labels.tolist()))


@dataclass(frozen=True)
class FeatureClassCounts:
    n1: np.ndarray
    n0: np.ndarray

    @property
    def k(self) -> int:
        return self.n1.shape[0]


@dataclass(frozen=True)
class PriorTransform:
    positive: np.ndarray  # True where the feature is in F+ (theta_j >= 0)
    n1: np.ndarray
    n0: np.ndarray
    p1: np.ndarray
    p0: np.ndarray
    p1_hat: np.ndarray  # normalized over F+ (zero outside it)
    p0_hat: np.ndarray  # normalized over F- (zero outside it)
    rho: float
    factor: np.ndarray

    @property
    def k(self) -> int:
        return self.factor.shape[0]


def predict_matrix(model: LinearModel, ids: Sequence[str], X: sp.csr_matrix, threshold: float = 0.5) -> PredictedCorpus:
    scores = predict_proba_many(model, X)
    # a probability exactly at the threshold counts as positive
    labels = (scores >= threshold).astype(np.int8)
    return PredictedCorpus(list(ids), X, labels, threshold, scores)


def predict_unlabeled(model: LinearModel, U: Corpus, vocab: Vocabulary, threshold: float = 0.5) -> PredictedCorpus:
    return predict_matrix(model, U.ids, vectorize_many(U, vocab), threshold)


def feature_class_counts(pred: PredictedCorpus, k: int | None = None) -> FeatureClassCounts:
    """Documents containing feature j, split by predicted label."""
    X = pred.X
    if k is not None and X.shape[1] != k:
        raise ValueError(f"dimension mismatch: {X.shape[1]} != {k}")
    present = (X != 0).astype(np.int64)
    y = pred.labels.astype(np.int64)
    n1 = np.asarray(present.T @ y).ravel()
    n0 = np.asarray(present.T @ (1 - y)).ravel()
    return FeatureClassCounts(n1, n0)


def smoothed_conditional(n1, n0):
    """Laplace-smoothed ``(p(y=1 | x^j=1), p(y=0 | x^j=1))``; works on scalars or arrays."""
    n1 = np.asarray(n1, dtype=float)
    n0 = np.asarray(n0, dtype=float)
    if np.any(n1 < 0) or np.any(n0 < 0):
        raise ValueError("counts must be non-negative")
    denom = 2.0 + n1 + n0
    p1, p0 = (1.0 + n1) / denom, (1.0 + n0) / denom
    if p1.ndim == 0:
        return float(p1), float(p0)
    return p1, p0


def compute_transform(model: LinearModel, counts: FeatureClassCounts) -> PriorTransform:
    k = model.k
    if k == 0:
        raise ValueError("empty vocabulary")
    if counts.k != k:
        raise ValueError(f"counts cover {counts.k} features, model has {k}")
    positive = model.theta >= 0
    p1, p0 = smoothed_conditional(counts.n1, counts.n0)
    p1_hat = np.zeros(k)
    p0_hat = np.zeros(k)
    groups = 0
    if positive.any():
        p1_hat[positive] = p1[positive] / p1[positive].sum()
        groups += 1
    if (~positive).any():
        p0_hat[~positive] = p0[~positive] / p0[~positive].sum()
        groups += 1
    # rho = k / (sum_{F+} p1_hat + sum_{F-} p0_hat); each non-empty group sums
    # to one by construction, so the denominator is the number of groups
    rho = k / groups
    factor = np.where(positive, rho * p1_hat, rho * p0_hat)
    return PriorTransform(positive, counts.n1, counts.n0, p1, p0, p1_hat, p0_hat, float(rho), factor)


def _check_binary(values) -> None:
    if np.any(np.asarray(values) != 1.0):
        raise ValueError("the transform applies to binary feature vectors only")


def apply_transform(x: SparseVector, t: PriorTransform) -> SparseVector:
    if x.dim != t.k:
        raise ValueError(f"dimension mismatch: {x.dim} != {t.k}")
    _check_binary(x.values)
    return SparseVector(x.indices, tuple(float(t.factor[j]) for j in x.indices), x.dim)


def apply_transform_matrix(X: sp.csr_matrix, t: PriorTransform) -> sp.csr_matrix:
    if X.shape[1] != t.k:
        raise ValueError(f"dimension mismatch: {X.shape[1]} != {t.k}")
    X = sp.csr_matrix(X)
    _check_binary(X.data)
    return sp.csr_matrix((t.factor[X.indices], X.indices.copy(), X.indptr.copy()), shape=X.shape)


@dataclass(frozen=True)
class InformedFit:
    baseline: LinearModel
    transform: PriorTransform
    informed: LinearModel
    training_set: TrainingSet
    predicted: PredictedCorpus


def fit_informed_featurized(
    data: FeaturizedPU,
    cfg: PUConfig,
    params: FitParams | None = None,
    threshold: float = 0.5,
) -> InformedFit:
    params = params or FitParams()
    ts = training_set_from(data, cfg)
    baseline = fit(ts.rows, params, seed=cfg.seed)
    pred = predict_matrix(baseline, data.unlabeled_ids, data.XU, threshold)
    transform = compute_transform(baseline, feature_class_counts(pred, data.k))
    rows: WeightedDataset = ts.rows.with_features(apply_transform_matrix(ts.rows.X, transform))
    informed = fit(rows, params, seed=cfg.seed)
    return InformedFit(baseline, transform, informed, ts, pred)


def fit_informed(
    L: Corpus,
    U: Corpus,
    vocab: Vocabulary,
    cfg: PUConfig,
    params: FitParams | None = None,
    threshold: float = 0.5,
) -> tuple[LinearModel, PriorTransform, LinearModel]:
    """Baseline fit, predict all of U, estimate the transform, refit.

    Returns ``(baseline_model, transform, informed_model)``.  The informed
    model expects transformed features (see :func:`apply_transform`).
    """
    res = fit_informed_featurized(featurize(L, U, vocab), cfg, params, threshold)
    return res.baseline, res.transform, res.informed


TRANSFORM_COLUMNS = ["term", "group", "n_j1", "n_j0", "p", "p_hat", "factor"]


def write_transform(t: PriorTransform, vocab: Vocabulary, path) -> None:
    """One row per feature in index order; ``p``/``p_hat`` are the values for the feature's own group."""
    terms = vocab.term_list()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(TRANSFORM_COLUMNS)
        for j, term in enumerate(terms):
            pos = bool(t.positive[j])
            out.writerow([
                term,
                "+" if pos else "-",
                int(t.n1[j]),
                int(t.n0[j]),
                repr(float(t.p1[j] if pos else t.p0[j])),
                repr(float(t.p1_hat[j] if pos else t.p0_hat[j])),
                repr(float(t.factor[j])),
            ])


def read_transform(vocab: Vocabulary, path) -> PriorTransform:
    k = vocab.k
    positive = np.ones(k, bool)
    n1, n0 = np.zeros(k, np.int64), np.zeros(k, np.int64)
    p_own, p_hat_own, factor = np.zeros(k), np.zeros(k), np.zeros(k)
    seen = np.zeros(k, bool)
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            j = vocab.terms.get(row["term"])
            if j is None:
                raise ValueError(f"{path}: term {row['term']!r} not in vocabulary")
            positive[j] = row["group"] == "+"
            n1[j], n0[j] = int(row["n_j1"]), int(row["n_j0"])
            p_own[j], p_hat_own[j], factor[j] = float(row["p"]), float(row["p_hat"]), float(row["factor"])
            seen[j] = True
    if not seen.all():
        raise ValueError(f"{path}: transform covers {int(seen.sum())} of {k} features")
    p1, p0 = smoothed_conditional(n1, n0)
    p1_hat = np.where(positive, p_hat_own, 0.0)
    p0_hat = np.where(positive, 0.0, p_hat_own)
    groups = int(positive.any()) + int((~positive).any())
    return PriorTransform(positive, n1, n0, p1, p0, p1_hat, p0_hat, k / groups, factor)
