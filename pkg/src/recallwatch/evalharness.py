"""Precision / recall / F1 / ROC-AUC and multi-trial experiment grids."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.stats import rankdata

from .corpus import Corpus
from .informed_prior import apply_transform_matrix, fit_informed_featurized
from .linmodel import FitParams, fit, predict_proba_many
from .pu_train import FeaturizedPU, PUConfig, featurize, training_set_from
from .vectorizer import SparseVector, Vocabulary, stack_vectors, vectorize_many

METHODS = ("baseline", "informed")
METRICS = ("roc_auc", "f1", "precision", "recall")


def confusion_metrics(scores: Sequence[float], gold: Sequence[int], threshold: float = 0.5) -> tuple[float, float, float]:
    """(precision, recall, f1); a score equal to the threshold is a positive prediction.

    Precision is 0 when nothing is predicted positive, recall is 0 when
    there are no gold positives, and F1 is 0 when P + R = 0.
    """
    scores = np.asarray(scores, dtype=float)
    gold = np.asarray(gold)
    if scores.shape != gold.shape:
        raise ValueError(f"length mismatch: {scores.shape[0]} scores, {gold.shape[0]} labels")
    if scores.size == 0:
        raise ValueError("no items")
    pred = scores >= threshold
    pos = gold == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    fn = int(np.sum(~pred & pos))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def roc_auc(scores: Sequence[float], gold: Sequence[int]) -> float:
    """Mann-Whitney form: the fraction of (positive, negative) pairs ranked
    correctly, ties counted as half.
    """
    scores = np.asarray(scores, dtype=float)
    gold = np.asarray(gold)
    if scores.shape != gold.shape:
        raise ValueError("length mismatch")
    n1 = int(np.sum(gold == 1))
    n0 = int(np.sum(gold == 0))
    if n1 == 0 or n0 == 0:
        raise ValueError("ROC AUC needs both classes")
    ranks = rankdata(scores, method="average")
    u = ranks[gold == 1].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def roc_curve(scores: Sequence[float], gold: Sequence[int]) -> list[tuple[float, float]]:
    """(fpr, tpr) points from (0, 0) to (1, 1), one per distinct score."""
    scores = np.asarray(scores, dtype=float)
    gold = np.asarray(gold)
    n1 = int(np.sum(gold == 1))
    n0 = int(np.sum(gold == 0))
    if n1 == 0 or n0 == 0:
        raise ValueError("ROC curve needs both classes")
    order = np.argsort(-scores, kind="stable")
    s, g = scores[order], gold[order]
    tps = np.cumsum(g == 1)
    fps = np.cumsum(g == 0)
    last = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    points = [(0.0, 0.0)]
    points += [(fps[i] / n0, tps[i] / n1) for i in last]
    return [(float(f), float(t)) for f, t in points]


@dataclass(frozen=True)
class LabeledEvalSet:
    X: sp.csr_matrix
    gold: np.ndarray
    ids: tuple[str, ...] = ()

    @classmethod
    def from_items(cls, items: Sequence[tuple[SparseVector, int]], dim: int | None = None) -> "LabeledEvalSet":
        return cls(stack_vectors([v for v, _ in items], dim), np.array([g for _, g in items], dtype=np.int64))

    @classmethod
    def from_corpus(cls, corpus: Corpus, labels: dict[str, int], vocab: Vocabulary) -> "LabeledEvalSet":
        missing = [d.id for d in corpus if d.id not in labels]
        if missing:
            raise ValueError(f"{len(missing)} evaluation documents lack a label (first: {missing[0]!r})")
        gold = np.array([labels[d.id] for d in corpus], dtype=np.int64)
        return cls(vectorize_many(corpus, vocab), gold, tuple(corpus.ids))

    @property
    def items(self) -> list[tuple[SparseVector, int]]:
        out = []
        for i in range(self.X.shape[0]):
            lo, hi = self.X.indptr[i], self.X.indptr[i + 1]
            v = SparseVector(tuple(int(j) for j in self.X.indices[lo:hi]), tuple(float(x) for x in self.X.data[lo:hi]), self.X.shape[1])
            out.append((v, int(self.gold[i])))
        return out


def _tau_label(tau: Optional[int]) -> str:
    return "none" if tau is None else str(tau)


@dataclass
class EvalReport:
    method: str
    tau: Optional[int]
    s: int
    seeds: list[int]
    threshold: float
    per_trial: dict[str, list[float]] = field(default_factory=lambda: {m: [] for m in METRICS})
    trial_scores: list[np.ndarray] = field(default_factory=list, repr=False, compare=False)

    @property
    def trials(self) -> int:
        return len(self.seeds)

    def mean(self, metric: str) -> float:
        return float(np.mean(self.per_trial[metric]))

    def stderr(self, metric: str) -> float:
        values = self.per_trial[metric]
        if len(values) < 2 or min(values) == max(values):
            return 0.0
        return float(np.std(values, ddof=1) / math.sqrt(len(values)))

    @property
    def precision(self) -> float:
        return self.mean("precision")

    @property
    def recall(self) -> float:
        return self.mean("recall")

    @property
    def f1(self) -> float:
        return self.mean("f1")

    @property
    def roc_auc(self) -> float:
        return self.mean("roc_auc")


def _record(report: EvalReport, scores: np.ndarray, gold: np.ndarray) -> None:
    p, r, f = confusion_metrics(scores, gold, report.threshold)
    report.per_trial["precision"].append(p)
    report.per_trial["recall"].append(r)
    report.per_trial["f1"].append(f)
    report.per_trial["roc_auc"].append(roc_auc(scores, gold))
    report.trial_scores.append(scores)


def run_trials_featurized(
    data: FeaturizedPU,
    eval_set: LabeledEvalSet,
    method: str | Sequence[str] = "informed",
    grid: Sequence[PUConfig] = (PUConfig(),),
    trials: int = 3,
    params: FitParams | None = None,
    threshold: float = 0.5,
    seeds: Sequence[int] | None = None,
) -> list[EvalReport]:
    """Evaluate each (method, grid point) over ``trials`` independent samples.

    Trial t of a grid point uses seed ``cfg.seed + t`` unless ``seeds`` is
    given.  Reports come back grid-point-major, methods in the order asked.
    """
    methods = (method,) if isinstance(method, str) else tuple(method)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if seeds is not None and len(seeds) != trials:
        raise ValueError("need one seed per trial")
    params = params or FitParams()
    reports = []
    for cfg in grid:
        trial_seeds = list(seeds) if seeds is not None else [cfg.seed + t for t in range(trials)]
        by_method = {m: EvalReport(m, cfg.tau, cfg.s, trial_seeds, threshold) for m in methods}
        for seed in trial_seeds:
            trial_cfg = replace(cfg, seed=seed)
            if "informed" in methods:
                res = fit_informed_featurized(data, trial_cfg, params, threshold)
                if "baseline" in methods:
                    _record(by_method["baseline"], predict_proba_many(res.baseline, eval_set.X), eval_set.gold)
                Xt = apply_transform_matrix(eval_set.X, res.transform)
                _record(by_method["informed"], predict_proba_many(res.informed, Xt), eval_set.gold)
            else:
                model = fit(training_set_from(data, trial_cfg).rows, params, seed=seed)
                _record(by_method["baseline"], predict_proba_many(model, eval_set.X), eval_set.gold)
        reports.extend(by_method[m] for m in methods)
    return reports


def run_trials(
    L: Corpus,
    U: Corpus,
    vocab: Vocabulary,
    eval_set: LabeledEvalSet,
    method: str | Sequence[str] = "informed",
    grid: Sequence[PUConfig] = (PUConfig(),),
    trials: int = 3,
    params: FitParams | None = None,
    threshold: float = 0.5,
    seeds: Sequence[int] | None = None,
) -> list[EvalReport]:
    return run_trials_featurized(featurize(L, U, vocab), eval_set, method, grid, trials, params, threshold, seeds)


def auc_trend(reports: Sequence[EvalReport]) -> str:
    """Describe mean AUC as tau increases: 'increasing', 'non-decreasing' or 'mixed'.

    Grid points without a tau filter are ignored.
    """
    pts = sorted((r.tau, r.roc_auc) for r in reports if r.tau is not None)
    diffs = [b[1] - a[1] for a, b in zip(pts, pts[1:])]
    if diffs and all(d > 0 for d in diffs):
        return "increasing"
    if all(d >= 0 for d in diffs):
        return "non-decreasing"
    return "mixed"


RESULT_COLUMNS = [
    "method", "tau", "auc", "auc_se", "f1", "f1_se",
    "precision", "precision_se", "recall", "recall_se",
]


def write_results(reports: Sequence[EvalReport], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(RESULT_COLUMNS)
        for r in reports:
            row = [r.method, _tau_label(r.tau)]
            for metric in METRICS:
                row += [repr(r.mean(metric)), repr(r.stderr(metric))]
            out.writerow(row)


def write_roc_points(reports: Sequence[EvalReport], eval_set: LabeledEvalSet, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["method", "tau", "trial", "fpr", "tpr"])
        for r in reports:
            for t, scores in enumerate(r.trial_scores):
                for fpr, tpr in roc_curve(scores, eval_set.gold):
                    out.writerow([r.method, _tau_label(r.tau), t, repr(fpr), repr(tpr)])
