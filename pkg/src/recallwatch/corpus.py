"""Line-delimited JSON corpora: complaints, reviews and recall records.

Every file holds one JSON object per line.  Blank lines are skipped.

    complaints   {"id", "text", "date"?}
    reviews      {"id", "text", "star_rating", "date"?, "product_id"?}
    recalls      {"recall_id", "recall_date", "title", "reason"?}
    products     {"product_id", "title"}
    labels       {"id", "label"}            (eval sets / hidden sidecars)
"""

from __future__ import annotations

import datetime as dt
import json
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional


class CorpusFormatError(ValueError):
    """A record in an input file violates the expected format."""

    def __init__(self, path, lineno: int, field_name: str, message: str):
        self.path = str(path)
        self.lineno = lineno
        self.field = field_name
        super().__init__(f"{path}:{lineno}: field {field_name!r}: {message}")


class Source(str, Enum):
    COMPLAINT = "complaint"
    REVIEW = "review"


class CorpusKind(str, Enum):
    POSITIVE_LABELED = "positive_labeled"
    UNLABELED = "unlabeled"


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    source: Source
    star_rating: Optional[int] = None
    date: Optional[dt.date] = None
    product_id: Optional[str] = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("text must be non-empty")
        if self.star_rating is not None and self.star_rating not in (1, 2, 3, 4, 5):
            raise ValueError(f"star_rating must be in 1..5, got {self.star_rating}")
        if self.source is Source.COMPLAINT and self.star_rating is not None:
            raise ValueError("complaints carry no star_rating")


@dataclass(frozen=True)
class RecallRecord:
    recall_id: str
    recall_date: dt.date
    title: str
    reason: Optional[str] = None

    def __post_init__(self):
        if not self.title.strip():
            raise ValueError("title must be non-empty")


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    kind: CorpusKind
    name: str = field(default="", compare=False)
    _by_id: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        by_id = {}
        for doc in self.documents:
            if doc.id in by_id:
                raise ValueError(f"duplicate document id {doc.id!r}")
            by_id[doc.id] = doc
        if self.kind is CorpusKind.POSITIVE_LABELED and any(
            d.source is not Source.COMPLAINT for d in self.documents
        ):
            raise ValueError("a positive_labeled corpus may only contain complaints")
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]


def _iter_json_lines(path):
    path = Path(path)
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(path, lineno, "<line>", f"invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusFormatError(path, lineno, "<line>", "expected a JSON object")
            yield lineno, obj


def _require_str(obj, key, path, lineno) -> str:
    if key not in obj or obj[key] is None:
        raise CorpusFormatError(path, lineno, key, "missing")
    value = obj[key]
    if not isinstance(value, str):
        raise CorpusFormatError(path, lineno, key, f"expected a string, got {type(value).__name__}")
    return value


def _optional_str(obj, key, path, lineno) -> Optional[str]:
    if obj.get(key) is None:
        return None
    return _require_str(obj, key, path, lineno)


def parse_date(value: str) -> dt.date:
    """Parse an ISO-8601 calendar date (YYYY-MM-DD)."""
    return dt.date.fromisoformat(value)


def _date_field(obj, key, path, lineno, required=False) -> Optional[dt.date]:
    raw = _require_str(obj, key, path, lineno) if required else _optional_str(obj, key, path, lineno)
    if raw is None:
        return None
    try:
        return parse_date(raw)
    except ValueError:
        raise CorpusFormatError(path, lineno, key, f"not a calendar date: {raw!r}") from None


def _parse_document(obj, source: Source, path, lineno) -> Document:
    doc_id = _require_str(obj, "id", path, lineno)
    text = _require_str(obj, "text", path, lineno)
    if not text.strip():
        raise CorpusFormatError(path, lineno, "text", "empty after trimming whitespace")
    rating = obj.get("star_rating")
    if rating is not None:
        if source is Source.COMPLAINT:
            raise CorpusFormatError(path, lineno, "star_rating", "complaints carry no star_rating")
        if isinstance(rating, bool) or not isinstance(rating, int) or not 1 <= rating <= 5:
            raise CorpusFormatError(path, lineno, "star_rating", f"must be an integer in 1..5, got {rating!r}")
    product_id = _optional_str(obj, "product_id", path, lineno)
    if product_id is not None and source is Source.COMPLAINT:
        raise CorpusFormatError(path, lineno, "product_id", "complaints carry no product_id")
    return Document(
        id=doc_id,
        text=text,
        source=source,
        star_rating=rating,
        date=_date_field(obj, "date", path, lineno),
        product_id=product_id,
    )


def load_corpus(path, kind) -> Corpus:
    """Load a complaints (``positive_labeled``) or reviews (``unlabeled``) file.

    Raises :class:`CorpusFormatError` naming the line and field of the first
    bad record.  An empty file yields an empty corpus and a warning.
    """
    kind = CorpusKind(kind)
    source = Source.COMPLAINT if kind is CorpusKind.POSITIVE_LABELED else Source.REVIEW
    docs = []
    seen = {}
    for lineno, obj in _iter_json_lines(path):
        doc = _parse_document(obj, source, path, lineno)
        if doc.id in seen:
            raise CorpusFormatError(path, lineno, "id", f"duplicate id {doc.id!r} (first on line {seen[doc.id]})")
        seen[doc.id] = lineno
        docs.append(doc)
    if not docs:
        warnings.warn(f"{path}: no records", stacklevel=2)
    return Corpus(tuple(docs), kind, name=Path(path).stem)


def load_labels(path) -> dict[str, int]:
    """Read a ``{"id", "label"}`` file (labels 0/1), or the labels embedded in a labeled reviews file."""
    labels = {}
    for lineno, obj in _iter_json_lines(path):
        doc_id = _require_str(obj, "id", path, lineno)
        label = obj.get("label")
        if label not in (0, 1) or isinstance(label, bool):
            raise CorpusFormatError(path, lineno, "label", f"must be 0 or 1, got {label!r}")
        labels[doc_id] = int(label)
    return labels


def load_recalls(path) -> list[RecallRecord]:
    records = []
    for lineno, obj in _iter_json_lines(path):
        title = _require_str(obj, "title", path, lineno)
        if not title.strip():
            raise CorpusFormatError(path, lineno, "title", "empty")
        records.append(
            RecallRecord(
                recall_id=_require_str(obj, "recall_id", path, lineno),
                recall_date=_date_field(obj, "recall_date", path, lineno, required=True),
                title=title,
                reason=_optional_str(obj, "reason", path, lineno),
            )
        )
    return records


def load_products(path) -> list[tuple[str, str]]:
    return [
        (_require_str(obj, "product_id", path, lineno), _require_str(obj, "title", path, lineno))
        for lineno, obj in _iter_json_lines(path)
    ]


def document_record(doc: Document) -> dict:
    rec = {"id": doc.id, "text": doc.text}
    if doc.star_rating is not None:
        rec["star_rating"] = doc.star_rating
    if doc.date is not None:
        rec["date"] = doc.date.isoformat()
    if doc.product_id is not None:
        rec["product_id"] = doc.product_id
    return rec


def recall_record(rec: RecallRecord) -> dict:
    out = {"recall_id": rec.recall_id, "recall_date": rec.recall_date.isoformat(), "title": rec.title}
    if rec.reason is not None:
        out["reason"] = rec.reason
    return out


def write_json_lines(records: Iterable[dict], path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=False))
            fh.write("\n")


def dump_corpus(corpus: Corpus, path) -> None:
    write_json_lines((document_record(d) for d in corpus), path)


def dump_recalls(recalls: Iterable[RecallRecord], path) -> None:
    write_json_lines((recall_record(r) for r in recalls), path)
