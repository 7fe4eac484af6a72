"""Unigram + bigram vocabulary with document-frequency pruning, binary vectors."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, Document

DEFAULT_MIN_DF = 50
DEFAULT_MAX_DF_RATIO = 0.95

# any maximal run of characters that are not letters or digits
_SPLIT = re.compile(r"[\W_]+")


def tokenize(text: str) -> list[str]:
    return [t for t in _SPLIT.split(text.lower()) if t]


def term_set(text: str) -> set[str]:
    """Distinct unigrams and adjacent-token bigrams of ``text``."""
    toks = tokenize(text)
    terms = set(toks)
    terms.update(f"{a} {b}" for a, b in zip(toks, toks[1:]))
    return terms


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, value) entries over a ``dim``-dimensional feature space."""

    indices: tuple[int, ...]
    values: tuple[float, ...]
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if self.indices and (self.indices[0] < 0 or self.indices[-1] >= self.dim):
            raise ValueError(f"index out of range for dimension {self.dim}")
        if any(not math.isfinite(v) or v < 0 for v in self.values):
            raise ValueError("values must be finite and non-negative")

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices, self.values))

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[int, float]], dim: int) -> "SparseVector":
        entries = sorted(entries)
        return cls(tuple(int(j) for j, _ in entries), tuple(float(v) for _, v in entries), dim)

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (np.asarray(self.values, dtype=float), np.asarray(self.indices, dtype=np.int64), [0, len(self.indices)]),
            shape=(1, self.dim),
        )

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[list(self.indices)] = self.values
        return out


@dataclass(frozen=True)
class Vocabulary:
    """Retained terms; ``terms`` maps term -> index 0..k-1 in lexicographic term order."""

    terms: dict[str, int]
    doc_freq: dict[str, int]
    total_docs: int
    min_df: int
    max_df_ratio: float

    def __len__(self):
        return len(self.terms)

    @property
    def k(self) -> int:
        return len(self.terms)

    def term_list(self) -> list[str]:
        out = [""] * len(self.terms)
        for term, j in self.terms.items():
            out[j] = term
        return out

    def doc_freq_array(self) -> np.ndarray:
        out = np.zeros(self.k, dtype=np.int64)
        for term, j in self.terms.items():
            out[j] = self.doc_freq[term]
        return out


def build_vocabulary(
    corpus: Corpus | Sequence[Document],
    min_df: int = DEFAULT_MIN_DF,
    max_df_ratio: float = DEFAULT_MAX_DF_RATIO,
) -> Vocabulary:
    """Keep every unigram/bigram whose document frequency lies in
    ``[min_df, max_df_ratio * total_docs]``.
    """
    docs = list(corpus)
    if not docs:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    if not 0 < max_df_ratio <= 1:
        raise ValueError(f"max_df_ratio must be in (0, 1], got {max_df_ratio}")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(term_set(doc.text))
    ceiling = max_df_ratio * len(docs)
    kept = sorted(t for t, n in df.items() if min_df <= n <= ceiling)
    return Vocabulary(
        terms={t: j for j, t in enumerate(kept)},
        doc_freq={t: df[t] for t in kept},
        total_docs=len(docs),
        min_df=min_df,
        max_df_ratio=max_df_ratio,
    )


def _indices(text: str, vocab: Vocabulary) -> list[int]:
    index = vocab.terms
    return sorted(index[t] for t in term_set(text) if t in index)


def vectorize(doc: Document | str, vocab: Vocabulary) -> SparseVector:
    text = doc if isinstance(doc, str) else doc.text
    idx = _indices(text, vocab)
    return SparseVector(tuple(idx), (1.0,) * len(idx), vocab.k)


def vectorize_many(docs: Iterable[Document | str], vocab: Vocabulary) -> sp.csr_matrix:
    """Binary document-term matrix, one row per document, in input order."""
    indptr = [0]
    indices: list[int] = []
    for doc in docs:
        text = doc if isinstance(doc, str) else doc.text
        indices.extend(_indices(text, vocab))
        indptr.append(len(indices))
    data = np.ones(len(indices))
    return sp.csr_matrix(
        (data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(indptr) - 1, vocab.k),
    )


def row_vector(X: sp.csr_matrix, i: int) -> SparseVector:
    lo, hi = X.indptr[i], X.indptr[i + 1]
    return SparseVector(tuple(int(j) for j in X.indices[lo:hi]), tuple(float(v) for v in X.data[lo:hi]), X.shape[1])


def stack_vectors(vectors: Sequence[SparseVector], dim: int | None = None) -> sp.csr_matrix:
    if dim is None:
        if not vectors:
            raise ValueError("dimension required for an empty stack")
        dim = vectors[0].dim
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for v in vectors:
        if v.dim != dim:
            raise ValueError(f"dimension mismatch: {v.dim} != {dim}")
        indices.extend(v.indices)
        data.extend(v.values)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), dim),
    )


def save_vocabulary(vocab: Vocabulary, path) -> None:
    """Header ``total_docs min_df max_df_ratio``, then ``term<TAB>index<TAB>doc_freq`` per term."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"# total_docs={vocab.total_docs}\tmin_df={vocab.min_df}\tmax_df_ratio={vocab.max_df_ratio!r}\n")
        for term in vocab.term_list():
            fh.write(f"{term}\t{vocab.terms[term]}\t{vocab.doc_freq[term]}\n")


def load_vocabulary(path) -> Vocabulary:
    with Path(path).open(encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing vocabulary header")
        meta = dict(kv.split("=", 1) for kv in header[1:].strip().split("\t"))
        terms, doc_freq = {}, {}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                term, j, n = line.split("\t")
                terms[term] = int(j)
                doc_freq[term] = int(n)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed vocabulary line") from None
    if sorted(terms.values()) != list(range(len(terms))):
        raise ValueError(f"{path}: indices are not dense 0..k-1")
    return Vocabulary(
        terms=terms,
        doc_freq=doc_freq,
        total_docs=int(meta["total_docs"]),
        min_df=int(meta["min_df"]),
        max_df_ratio=float(meta["max_df_ratio"]),
    )
