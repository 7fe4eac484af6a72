"""Class-weighted, L2-regularized logistic regression fit by full-batch gradient descent.

Objective over N rows with labels y_i, weights w_i and features x_i::

    J(theta, b) = (1/N) * sum_i w_i * nll(y_i, theta . x_i + b) + (lam/2) * ||theta||^2

The intercept b is not penalized.  Features are used exactly as given (no
standardization), which is what lets feature re-scaling change the fit.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .vectorizer import SparseVector, Vocabulary, row_vector, stack_vectors

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class FitParams:
    lam: float = 1.0
    lr: float = 0.1
    epochs: int = 200
    tol: float = 1e-8

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.lr <= 0:
            raise ValueError(f"learning rate must be > 0, got {self.lr}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


@dataclass
class LinearModel:
    theta: np.ndarray
    intercept: float = 0.0
    lam: float = 1.0
    trained: bool = False
    history: list[float] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta must be finite")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")

    @property
    def k(self) -> int:
        return self.theta.shape[0]

    @classmethod
    def zeros(cls, k: int, lam: float = 1.0) -> "LinearModel":
        return cls(np.zeros(k), 0.0, lam, trained=True)


@dataclass(frozen=True)
class WeightedDataset:
    """Rows of (features, label, weight) held as a CSR matrix plus two arrays."""

    X: sp.csr_matrix
    y: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        X = sp.csr_matrix(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if not (X.shape[0] == y.shape[0] == w.shape[0]):
            raise ValueError("X, y and w must have the same number of rows")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[SparseVector, int, float]], dim: int | None = None) -> "WeightedDataset":
        X = stack_vectors([r[0] for r in rows], dim)
        return cls(X, np.array([r[1] for r in rows], dtype=float), np.array([r[2] for r in rows], dtype=float))

    def __len__(self):
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def rows(self) -> Iterator[tuple[SparseVector, int, float]]:
        for i in range(len(self)):
            yield row_vector(self.X, i), int(self.y[i]), float(self.w[i])

    def with_features(self, X: sp.csr_matrix) -> "WeightedDataset":
        return WeightedDataset(X, self.y, self.w)


def class_weights(p: int, n: int) -> tuple[float, float]:
    """Instance weights inversely proportional to class frequency:
    ``((n+p)/(2p), (n+p)/(2n))``.
    """
    if p < 1 or n < 1:
        raise ValueError(f"both classes need at least one example (p={p}, n={n})")
    return (n + p) / (2 * p), (n + p) / (2 * n)


def _margins(theta, intercept, X) -> np.ndarray:
    return X @ theta + intercept


def _objective(theta, intercept, lam, data: WeightedDataset):
    z = _margins(theta, intercept, data.X)
    # nll = log(1 + exp(-z)) for y=1, log(1 + exp(z)) for y=0
    nll = np.logaddexp(0.0, np.where(data.y == 1, -z, z))
    n = len(data)
    loss = float(data.w @ nll) / n + 0.5 * lam * float(theta @ theta)
    return loss, z


def loss_and_gradient(model: LinearModel, data: WeightedDataset) -> tuple[float, np.ndarray]:
    """Objective value and its gradient; the gradient's last entry is d/d intercept."""
    if data.k != model.k:
        raise ValueError(f"dimension mismatch: model has {model.k} features, data {data.k}")
    if len(data) == 0:
        raise ValueError("empty dataset")
    loss, z = _objective(model.theta, model.intercept, model.lam, data)
    resid = data.w * (expit(z) - data.y) / len(data)
    grad = np.empty(model.k + 1)
    grad[:-1] = data.X.T @ resid + model.lam * model.theta
    grad[-1] = resid.sum()
    return loss, grad


def fit(data: WeightedDataset, params: FitParams | None = None, seed: int = 0, **overrides) -> LinearModel:
    """Gradient descent from the zero model.

    ``params.lr`` is the initial step; a step that would raise the objective
    is retried at half the rate (the halved rate is kept), so the objective
    never increases.  Stops after ``epochs`` or once an accepted step improves
    the objective by less than ``tol``.  There is no stochastic component:
    ``seed`` only exists so every pipeline stage takes one.
    """
    params = params or FitParams()
    if overrides:
        params = FitParams(**{**params.__dict__, **overrides})
    if len(data) == 0:
        raise TrainingError("cannot fit on an empty dataset")
    if np.unique(data.y).size < 2:
        raise TrainingError("training data contains a single class")
    model = LinearModel(np.zeros(data.k), 0.0, params.lam)
    loss, grad = loss_and_gradient(model, data)
    if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
        raise TrainingError("non-finite loss at epoch 1")
    history = [loss]
    lr = params.lr
    for epoch in range(1, params.epochs + 1):
        for _ in range(60):
            theta, b = model.theta - lr * grad[:-1], model.intercept - lr * grad[-1]
            if not (np.all(np.isfinite(theta)) and math.isfinite(b)):
                raise TrainingError(f"non-finite parameters at epoch {epoch}")
            cand = LinearModel(theta, b, params.lam)
            new_loss, new_grad = loss_and_gradient(cand, data)
            if not math.isfinite(new_loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            if new_loss <= loss:
                break
            lr *= 0.5
        else:
            log.debug("step size underflow at epoch %d", epoch)
            break
        improvement = loss - new_loss
        model, loss, grad = cand, new_loss, new_grad
        history.append(loss)
        if improvement < params.tol:
            break
    model.trained = True
    model.history = history
    return model


def predict_proba(model: LinearModel, x: SparseVector) -> float:
    if x.dim != model.k:
        raise ValueError(f"dimension mismatch: model has {model.k} features, vector {x.dim}")
    z = sum(model.theta[j] * v for j, v in zip(x.indices, x.values)) + model.intercept
    return float(expit(z))


def predict_proba_many(model: LinearModel, X: sp.spmatrix) -> np.ndarray:
    if X.shape[1] != model.k:
        raise ValueError(f"dimension mismatch: model has {model.k} features, matrix {X.shape[1]}")
    return expit(_margins(model.theta, model.intercept, X))


def save_model(model: LinearModel, path) -> None:
    """Header ``k lambda intercept``, then ``j<TAB>theta_j`` for each nonzero coefficient."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"# k={model.k}\tlambda={model.lam!r}\tintercept={float(model.intercept)!r}\n")
        for j in np.flatnonzero(model.theta):
            fh.write(f"{j}\t{float(model.theta[j])!r}\n")


def load_model(path) -> LinearModel:
    with Path(path).open(encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing model header")
        meta = dict(kv.split("=", 1) for kv in header[1:].strip().split("\t"))
        theta = np.zeros(int(meta["k"]))
        for line in fh:
            if line.strip():
                j, v = line.split("\t")
                theta[int(j)] = float(v)
    return LinearModel(theta, float(meta["intercept"]), float(meta["lambda"]), trained=True)


def top_terms(model: LinearModel, vocab: Vocabulary, n: int = 20) -> list[tuple[str, float]]:
    """The ``n`` terms with the largest positive-class coefficients (ties by term)."""
    terms = vocab.term_list()
    order = sorted(range(model.k), key=lambda j: (-model.theta[j], terms[j]))
    return [(terms[j], float(model.theta[j])) for j in order[:n]]


def write_top_terms(rows: Iterable[tuple[str, float]], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["term", "coefficient"])
        for term, coef in rows:
            out.writerow([term, repr(coef)])
