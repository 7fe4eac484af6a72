"""Baseline positive-unlabeled training set: complaints as positives plus a
seeded sample of high-rated reviews treated as negatives.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, CorpusKind
from .linmodel import WeightedDataset, class_weights
from .vectorizer import Vocabulary, vectorize_many


@dataclass(frozen=True)
class PUConfig:
    tau: Optional[int] = 5
    s: int = 20_000
    seed: int = 0

    def __post_init__(self):
        if self.tau is not None and self.tau not in (1, 2, 3, 4, 5):
            raise ValueError(f"tau must be in 1..5 or None, got {self.tau}")
        if self.s < 0:
            raise ValueError(f"s must be >= 0, got {self.s}")


@dataclass(frozen=True)
class FeaturizedPU:
    """Both corpora vectorized once, so repeated trials only resample."""

    positive_ids: list[str]
    XL: sp.csr_matrix
    unlabeled_ids: list[str]
    XU: sp.csr_matrix
    ratings: np.ndarray  # 0 where a review has no star rating
    positives_from: str = "L"
    negatives_from: str = "U"

    @property
    def k(self) -> int:
        return self.XL.shape[1]


@dataclass(frozen=True)
class TrainingSet:
    rows: WeightedDataset
    positives_from: str
    negatives_from: str
    sampled_ids: list[str]
    n_positive: int
    n_negative: int


def featurize(L: Corpus, U: Corpus, vocab: Vocabulary) -> FeaturizedPU:
    if L.kind is not CorpusKind.POSITIVE_LABELED:
        raise ValueError("L must be a positive_labeled corpus")
    if U.kind is not CorpusKind.UNLABELED:
        raise ValueError("U must be an unlabeled corpus")
    ratings = np.array([d.star_rating or 0 for d in U], dtype=np.int64)
    return FeaturizedPU(
        positive_ids=L.ids,
        XL=vectorize_many(L, vocab),
        unlabeled_ids=U.ids,
        XU=vectorize_many(U, vocab),
        ratings=ratings,
        positives_from=L.name or "L",
        negatives_from=U.name or "U",
    )


def eligible_pool(ratings: np.ndarray, tau: Optional[int]) -> np.ndarray:
    if tau is None:
        return np.arange(ratings.shape[0])
    return np.flatnonzero(ratings >= tau)


def sample_negatives(ratings: np.ndarray, cfg: PUConfig) -> np.ndarray:
    """Row indices of ``cfg.s`` reviews drawn uniformly without replacement
    from those rated at least ``tau``.
    """
    pool = eligible_pool(ratings, cfg.tau)
    s = cfg.s
    if s > pool.size:
        warnings.warn(f"eligible pool has {pool.size} reviews, fewer than s={s}; using the whole pool", stacklevel=3)
        s = pool.size
    rng = np.random.default_rng(cfg.seed)
    return rng.choice(pool, size=s, replace=False)


def training_set_from(data: FeaturizedPU, cfg: PUConfig) -> TrainingSet:
    p = data.XL.shape[0]
    if p == 0:
        raise ValueError("the positive corpus is empty")
    neg = sample_negatives(data.ratings, cfg)
    n = neg.size
    w_pos, w_neg = class_weights(p, n) if n else (1.0, 1.0)
    X = sp.vstack([data.XL, data.XU[neg]], format="csr")
    y = np.concatenate([np.ones(p), np.zeros(n)])
    w = np.concatenate([np.full(p, w_pos), np.full(n, w_neg)])
    return TrainingSet(
        rows=WeightedDataset(X, y, w),
        positives_from=data.positives_from,
        negatives_from=data.negatives_from,
        sampled_ids=[data.unlabeled_ids[i] for i in neg],
        n_positive=p,
        n_negative=n,
    )


def build_training_set(L: Corpus, U: Corpus, vocab: Vocabulary, cfg: PUConfig) -> TrainingSet:
    return training_set_from(featurize(L, U, vocab), cfg)


def write_sampled_ids(ts: TrainingSet, path) -> None:
    Path(path).write_text("".join(f"{i}\n" for i in ts.sampled_ids), encoding="utf-8")
