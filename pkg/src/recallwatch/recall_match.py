"""Recall-to-product matching and lead-time analytics for hazardous reviews."""

from __future__ import annotations

import csv
import datetime as dt
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .corpus import RecallRecord, parse_date
from .vectorizer import tokenize

# product categories of the "Baby" department used to pre-filter recall titles
CATEGORY_KEYWORDS = (
    "stroller", "car seat", "crib", "child carrier", "bath seat", "infant carrier",
    "bassinet", "pacifier", "rattle", "swing", "walker", "dresser",
)

STOP_TERMS = frozenset({"recall", "recalls", "recalled", "due", "to", "and", "of", "the", "for"})

DEFAULT_MIN_REVIEWS = 10


@dataclass(frozen=True)
class ProductMatch:
    recall_id: str
    product_id: str
    shared_terms: tuple[str, ...]
    verified: bool = False

    def __post_init__(self):
        if len(self.shared_terms) < 2:
            raise ValueError("a match needs at least two shared terms")


@dataclass(frozen=True)
class ReviewPrediction:
    review_id: str
    product_id: str
    date: Optional[dt.date]
    hazardous: bool
    score: float = float("nan")


def title_terms(title: str) -> set[str]:
    return set(tokenize(title)) - STOP_TERMS


def has_category_keyword(title: str, keywords: Iterable[str]) -> bool:
    """Keyword test on the tokenized title; a keyword also matches as a word
    prefix, so ``stroller`` finds ``Strollers``.
    """
    text = " " + " ".join(tokenize(title))
    return any(f" {' '.join(tokenize(kw))}" in text for kw in keywords)


def match_recalls(
    recalls: Sequence[RecallRecord],
    products: Sequence[tuple[str, str]],
    category_keywords: Sequence[str] = CATEGORY_KEYWORDS,
    min_shared: int = 2,
) -> list[ProductMatch]:
    """Candidate (recall, product) pairs sharing at least ``min_shared`` title terms.

    Only recalls whose title mentions a category keyword are considered.
    Every match is returned unverified.
    """
    by_term: dict[str, set[int]] = defaultdict(set)
    product_terms = []
    for i, (_, title) in enumerate(products):
        terms = title_terms(title)
        product_terms.append(terms)
        for t in terms:
            by_term[t].add(i)
    matches = []
    for rec in recalls:
        if not has_category_keyword(rec.title, category_keywords):
            continue
        rterms = title_terms(rec.title)
        candidates = sorted(set().union(*(by_term.get(t, set()) for t in rterms))) if rterms else []
        for i in candidates:
            shared = rterms & product_terms[i]
            if len(shared) >= min_shared:
                matches.append(ProductMatch(rec.recall_id, products[i][0], tuple(sorted(shared))))
    return matches


def offset_days(review_date: dt.date, recall_date: dt.date) -> int:
    """Signed day count; negative when the review precedes the recall."""
    return (review_date - recall_date).days


@dataclass(frozen=True)
class ReviewOffset:
    product_id: str
    review_id: str
    review_date: dt.date
    recall_date: dt.date
    offset_days: int


@dataclass
class LeadTimeReport:
    offsets: list[ReviewOffset]
    cumulative: dict[str, list[tuple[dt.date, int]]]
    review_counts: dict[str, int]
    hazard_counts: dict[str, int]
    excluded_products: list[str] = field(default_factory=list)

    @property
    def n_products(self) -> int:
        return len(self.review_counts)

    @property
    def products_with_early_warning(self) -> list[str]:
        return sorted({o.product_id for o in self.offsets if o.offset_days < 0})

    @property
    def early_warning_fraction(self) -> float:
        if not self.review_counts:
            return 0.0
        return len(self.products_with_early_warning) / self.n_products

    def summary(self) -> str:
        n_reviews = sum(self.review_counts.values())
        n_haz = sum(self.hazard_counts.values())
        early = len(self.products_with_early_warning)
        return (
            f"{self.n_products} products, {n_reviews} reviews, {n_haz} hazardous; "
            f"{early}/{self.n_products} products ({100 * self.early_warning_fraction:.1f}%) "
            f"have a hazardous review before the recall date"
        )


def _recall_dates(matches: Sequence[ProductMatch], recalls: Sequence[RecallRecord]) -> dict[str, dt.date]:
    by_id = {r.recall_id: r for r in recalls}
    dates: dict[str, dt.date] = {}
    for m in matches:
        if m.recall_id not in by_id:
            raise ValueError(f"match refers to unknown recall {m.recall_id!r}")
        d = by_id[m.recall_id].recall_date
        # a product in several recalls is dated by the earliest one
        if m.product_id not in dates or d < dates[m.product_id]:
            dates[m.product_id] = d
    return dates


def lead_time(
    predictions: Sequence[ReviewPrediction],
    matches: Sequence[ProductMatch],
    recalls: Sequence[RecallRecord],
    min_reviews: int = DEFAULT_MIN_REVIEWS,
) -> LeadTimeReport:
    recall_date = _recall_dates(matches, recalls)
    counts: dict[str, int] = defaultdict(int)
    for p in predictions:
        if p.product_id not in recall_date:
            raise ValueError(f"review {p.review_id!r} refers to product {p.product_id!r}, which matches no recall")
        counts[p.product_id] += 1
    kept = {pid for pid, n in counts.items() if n >= min_reviews}

    offsets = []
    for p in predictions:
        if not p.hazardous or p.product_id not in kept:
            continue
        if p.date is None:
            raise ValueError(f"hazardous review {p.review_id!r} has no date")
        rd = recall_date[p.product_id]
        offsets.append(ReviewOffset(p.product_id, p.review_id, p.date, rd, offset_days(p.date, rd)))
    offsets.sort(key=lambda o: (o.product_id, o.review_date, o.review_id))

    cumulative: dict[str, list[tuple[dt.date, int]]] = {pid: [] for pid in sorted(kept)}
    hazard_counts = {pid: 0 for pid in sorted(kept)}
    for o in offsets:
        hazard_counts[o.product_id] += 1
        series = cumulative[o.product_id]
        if series and series[-1][0] == o.review_date:
            series[-1] = (o.review_date, series[-1][1] + 1)
        else:
            series.append((o.review_date, hazard_counts[o.product_id]))
    return LeadTimeReport(
        offsets=offsets,
        cumulative=cumulative,
        review_counts={pid: counts[pid] for pid in sorted(kept)},
        hazard_counts=hazard_counts,
        excluded_products=sorted(set(counts) - kept),
    )


def offset_histogram(report: LeadTimeReport, bin_days: int = 30) -> list[tuple[int, int]]:
    """(bin start in days, count) for the hazardous-review offsets, ascending."""
    bins: dict[int, int] = defaultdict(int)
    for o in report.offsets:
        bins[(o.offset_days // bin_days) * bin_days] += 1
    return sorted(bins.items())


@dataclass
class HazardRates:
    rate_recalled: float
    rate_other: float
    per_product: dict[str, tuple[int, int, float]]  # product -> (reviews, hazardous, max score)

    def watchlist(self, n: int | None = None) -> list[tuple[str, int, float]]:
        """Products ranked by hazardous-review count, then by highest score."""
        ranked = sorted(
            ((pid, h, s) for pid, (_, h, s) in self.per_product.items() if h > 0),
            key=lambda r: (-r[1], -r[2], r[0]),
        )
        return ranked[:n] if n is not None else ranked


def hazard_rates(predictions: Sequence[ReviewPrediction], recalled_products: Iterable[str]) -> HazardRates:
    recalled = set(recalled_products)
    totals = {True: [0, 0], False: [0, 0]}
    per_product: dict[str, list] = {}
    for p in predictions:
        group = totals[p.product_id in recalled]
        group[0] += 1
        group[1] += int(p.hazardous)
        rec = per_product.setdefault(p.product_id, [0, 0, float("-inf")])
        rec[0] += 1
        rec[1] += int(p.hazardous)
        if p.score == p.score and p.score > rec[2]:
            rec[2] = p.score
    for flag, name in ((True, "recalled"), (False, "non-recalled")):
        if totals[flag][0] == 0:
            raise ValueError(f"no reviews of {name} products")
    return HazardRates(
        rate_recalled=totals[True][1] / totals[True][0],
        rate_other=totals[False][1] / totals[False][0],
        per_product={pid: (v[0], v[1], v[2]) for pid, v in sorted(per_product.items())},
    )


# --- file formats -----------------------------------------------------------

def write_matches(matches: Sequence[ProductMatch], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["recall_id", "product_id", "shared_terms", "verified"])
        for m in matches:
            out.writerow([m.recall_id, m.product_id, " ".join(m.shared_terms), int(m.verified)])


def read_matches(path) -> list[ProductMatch]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [
            ProductMatch(row["recall_id"], row["product_id"], tuple(row["shared_terms"].split()), row["verified"] in ("1", "true", "True"))
            for row in csv.DictReader(fh)
        ]


PREDICTION_COLUMNS = ["review_id", "product_id", "date", "score", "hazardous"]


def write_predictions(preds: Sequence[ReviewPrediction], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(PREDICTION_COLUMNS)
        for p in preds:
            out.writerow([p.review_id, p.product_id, p.date.isoformat() if p.date else "", repr(float(p.score)), int(p.hazardous)])


def read_predictions(path) -> list[ReviewPrediction]:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                out.append(ReviewPrediction(
                    review_id=row["review_id"],
                    product_id=row["product_id"],
                    date=parse_date(row["date"]) if row["date"] else None,
                    hazardous=row["hazardous"] == "1",
                    score=float(row["score"]) if row.get("score") else float("nan"),
                ))
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad prediction row ({exc})") from None
    return out


def write_offsets(report: LeadTimeReport, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["product_id", "review_id", "offset_days"])
        for o in report.offsets:
            out.writerow([o.product_id, o.review_id, o.offset_days])


def write_cumulative(report: LeadTimeReport, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["product_id", "date", "cum_count"])
        for pid, series in report.cumulative.items():
            for d, c in series:
                out.writerow([pid, d.isoformat(), c])
