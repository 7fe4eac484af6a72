"""Synthetic complaint/review corpora with a planted selection bias.

Documents are bags of tokens.  Each document picks one product type, names it
at least once, and otherwise mixes hazard words, product-type words, negative-sentiment words and Zipf-weighted
filler.  Complaints pick types from ``complaint_share`` and reviews from
``review_share``.  When the two differ, a type's words look hazardous to a
classifier trained on complaints versus reviews, even though they say nothing
about hazards in the review population.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import (
    Corpus,
    CorpusKind,
    Document,
    RecallRecord,
    Source,
    document_record,
    dump_corpus,
    dump_recalls,
    write_json_lines,
)


@dataclass(frozen=True)
class ProductType:
    name: str
    complaint_share: float
    review_share: float
    terms: tuple[str, ...]


DEFAULT_TYPES = (
    ProductType("crib", 0.40, 0.06, ("crib", "mattress", "slats")),
    ProductType("diaper", 0.25, 0.10, ("diaper", "pampers", "wipes")),
    ProductType("stroller", 0.15, 0.30, ("stroller", "wheels", "canopy")),
    ProductType("bottle", 0.10, 0.30, ("bottle", "nipple", "formula")),
    ProductType("toy", 0.10, 0.24, ("toy", "blocks", "music")),
)

HAZARD_VOCAB = (
    "dangerous", "hazard", "injured", "choking", "swallowed", "emergency", "hospital",
    "bleeding", "trapped", "suffocate", "unsafe", "burned", "strangled", "pinched",
    "bruise", "smoke", "sharp", "recalled", "concussion", "stitches",
)

BENIGN_NEGATIVE_VOCAB = (
    "broke", "cheap", "return", "disappointed", "flimsy", "refund", "waste", "poor",
    "smell", "leaks", "ripped", "useless", "stopped", "junk", "annoying",
)

# token-category mixtures: (hazard, type, negative, filler)
_MIX = {
    "complaint": (0.22, 0.22, 0.10, 0.46),
    "hazardous": (0.14, 0.10, 0.10, 0.66),
    "benign_low": (0.004, 0.10, 0.16, 0.736),
    "benign_high": (0.002, 0.10, 0.02, 0.878),
}

# star-rating distributions over 1..5
_HAZARD_RATINGS = (0.50, 0.25, 0.12, 0.08, 0.05)
_BENIGN_RATINGS = (0.06, 0.06, 0.10, 0.23, 0.55)

_REVIEW_SPAN = (dt.date(2008, 8, 1), dt.date(2014, 7, 31))
_COMPLAINT_SPAN = (dt.date(2011, 3, 1), dt.date(2016, 5, 31))


def _filler_vocab(n: int) -> tuple[str, ...]:
    return tuple(f"w{i:04d}" for i in range(n))


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_complaints: int = 2_000
    n_reviews: int = 100_000
    hazard_rate: float = 0.01
    product_types: tuple[ProductType, ...] = DEFAULT_TYPES
    hazard_vocab: tuple[str, ...] = HAZARD_VOCAB
    benign_negative_vocab: tuple[str, ...] = BENIGN_NEGATIVE_VOCAB
    filler_vocab: tuple[str, ...] = field(default_factory=lambda: _filler_vocab(400))
    mean_length: float = 40.0
    min_length: int = 10
    zipf_exponent: float = 1.0
    n_products: int = 1_000
    recalled_fraction: float = 0.1
    recalled_hazard_multiplier: float = 2.0
    n_eval_hazardous: int = 200
    n_eval_benign: int = 800

    def __post_init__(self):
        for attr in ("complaint_share", "review_share"):
            total = sum(getattr(t, attr) for t in self.product_types)
            if not self.product_types or abs(total - 1.0) > 1e-9:
                raise ValueError(f"product-type {attr} values must sum to 1, got {total}")
            if any(getattr(t, attr) < 0 for t in self.product_types):
                raise ValueError(f"negative {attr}")
        if not 0 <= self.hazard_rate < 1:
            raise ValueError("hazard_rate must be in [0, 1)")
        if self.hazard_rate * max(1.0, self.recalled_hazard_multiplier) >= 1:
            raise ValueError("hazard_rate too large for the recalled-product multiplier")
        lists = [set(self.hazard_vocab), set(self.benign_negative_vocab), set(self.filler_vocab)]
        lists += [set(t.terms) for t in self.product_types]
        if sum(len(s) for s in lists) != len(set().union(*lists)):
            raise ValueError("vocabulary lists must be disjoint")
        if not 1 <= self.min_length < self.mean_length:
            raise ValueError("need 1 <= min_length < mean_length")
        if self.n_products < 1 or not 0 <= self.recalled_fraction <= 1:
            raise ValueError("invalid product settings")


@dataclass(frozen=True)
class SynthProduct:
    product_id: str
    title: str
    type_name: str
    recalled: bool


@dataclass(frozen=True)
class SynthCorpus:
    config: SynthConfig
    complaints: Corpus
    reviews: Corpus
    review_labels: dict[str, int]
    eval_reviews: Corpus
    eval_labels: dict[str, int]
    products: tuple[SynthProduct, ...]
    recalls: tuple[RecallRecord, ...]
    recall_of_product: dict[str, str]
    bias_tokens: tuple[str, ...]
    hazard_tokens: tuple[str, ...]

    @property
    def eval_gold(self) -> list[int]:
        return [self.eval_labels[d.id] for d in self.eval_reviews]


_KINDS = ("complaint", "hazardous", "benign_low", "benign_high")


class _Sampler:
    """Vectorized document sampler; all draws come from one generator in a fixed order."""

    def __init__(self, cfg: SynthConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        ranks = np.arange(1, len(cfg.filler_vocab) + 1, dtype=float)
        zipf = ranks ** -cfg.zipf_exponent
        self.filler_p = zipf / zipf.sum()
        self.complaint_share = np.array([t.complaint_share for t in cfg.product_types])
        self.review_share = np.array([t.review_share for t in cfg.product_types])
        self.mix_cum = np.cumsum([_MIX[k] for k in _KINDS], axis=1)

    def lengths(self, n: int) -> np.ndarray:
        # shifted geometric: min_length - 1 + Geom(p), mean equal to mean_length
        extra = self.cfg.mean_length - self.cfg.min_length + 1
        return self.cfg.min_length - 1 + self.rng.geometric(1.0 / extra, size=n)

    def texts(self, kinds: np.ndarray, types: np.ndarray) -> list[str]:
        cfg, rng = self.cfg, self.rng
        n = kinds.shape[0]
        lengths = self.lengths(n)
        owner = np.repeat(np.arange(n), lengths)
        u = rng.random(owner.size)
        cats = (u[:, None] >= self.mix_cum[kinds[owner], :3]).sum(axis=1)
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
        # every document names its product type at least once
        cats[starts] = 1
        toks = np.empty(owner.size, dtype=object)

        def fill(mask, vocab, p=None):
            m = int(mask.sum())
            if m:
                toks[mask] = np.asarray(vocab, dtype=object)[rng.choice(len(vocab), size=m, p=p)]

        fill(cats == 0, cfg.hazard_vocab)
        for t, ptype in enumerate(cfg.product_types):
            fill((cats == 1) & (types[owner] == t), ptype.terms)
        fill(cats == 2, cfg.benign_negative_vocab)
        fill(cats == 3, cfg.filler_vocab, self.filler_p)
        order = np.lexsort((rng.random(owner.size), owner))
        toks = toks[order]
        ends = starts + lengths
        return [" ".join(toks[starts[i]:ends[i]]) for i in range(n)]

    def dates(self, span, n: int) -> list[dt.date]:
        lo, hi = span
        offsets = self.rng.integers(0, (hi - lo).days + 1, size=n)
        return [lo + dt.timedelta(days=int(d)) for d in offsets]

    def ratings(self, hazardous: np.ndarray) -> np.ndarray:
        u = self.rng.random(hazardous.shape[0])
        cum_h = np.cumsum(_HAZARD_RATINGS)[:4]
        cum_b = np.cumsum(_BENIGN_RATINGS)[:4]
        cum = np.where(hazardous[:, None], cum_h, cum_b)
        return 1 + (u[:, None] >= cum).sum(axis=1)


def _make_products(cfg: SynthConfig, smp: _Sampler) -> tuple[list[SynthProduct], np.ndarray, np.ndarray]:
    rng = smp.rng
    n_recalled = int(round(cfg.recalled_fraction * cfg.n_products))
    recalled = np.zeros(cfg.n_products, bool)
    recalled[rng.choice(cfg.n_products, size=n_recalled, replace=False)] = True
    # quota allocation (largest remainder) keeps product-level type shares at
    # review_share, so per-review type draws stay binomial
    quota = smp.review_share * cfg.n_products
    counts = np.floor(quota).astype(np.int64)
    short = cfg.n_products - counts.sum()
    counts[np.argsort(-(quota - counts), kind="stable")[:short]] += 1
    types = rng.permutation(np.repeat(np.arange(len(cfg.product_types)), counts))
    products = []
    for i in range(cfg.n_products):
        t = cfg.product_types[types[i]]
        title = f"brand{i % 97:02d} model{i:04d} {t.name}"
        products.append(SynthProduct(f"P{i:05d}", title, t.name, bool(recalled[i])))
    return products, recalled, types


def _reviews(cfg, smp, products, recalled, product_types, n, prefix, fixed_label=None):
    """Reviews spread uniformly over products and naming their product's type.

    Recalled products carry a ``recalled_hazard_multiplier`` times higher
    hazard rate, scaled so the overall rate stays ``hazard_rate``.
    """
    rng = smp.rng
    r = recalled.mean()
    base = cfg.hazard_rate / (1.0 + (cfg.recalled_hazard_multiplier - 1.0) * r)
    prod = rng.integers(cfg.n_products, size=n)
    if fixed_label is None:
        rate = base * np.where(recalled[prod], cfg.recalled_hazard_multiplier, 1.0)
        hazardous = rng.random(n) < rate
    else:
        hazardous = np.full(n, bool(fixed_label))
    types = product_types[prod]
    ratings = smp.ratings(hazardous)
    kinds = np.where(hazardous, 1, np.where(ratings <= 2, 2, 3))
    texts = smp.texts(kinds, types)
    dates = smp.dates(_REVIEW_SPAN, n)
    docs, labels = [], {}
    for i in range(n):
        doc = Document(
            id=f"{prefix}{i:06d}",
            text=texts[i],
            source=Source.REVIEW,
            star_rating=int(ratings[i]),
            date=dates[i],
            product_id=products[prod[i]].product_id,
        )
        docs.append(doc)
        labels[doc.id] = int(hazardous[i])
    return docs, labels


def generate(cfg: SynthConfig | None = None) -> SynthCorpus:
    """Build a full synthetic world; identical configs give identical corpora."""
    cfg = cfg or SynthConfig()
    smp = _Sampler(cfg, np.random.default_rng(cfg.seed))
    rng = smp.rng

    n = cfg.n_complaints
    ctypes = rng.choice(len(cfg.product_types), size=n, p=smp.complaint_share)
    ctexts = smp.texts(np.zeros(n, dtype=np.int64), ctypes)
    cdates = smp.dates(_COMPLAINT_SPAN, n)
    complaints = [Document(f"C{i:06d}", ctexts[i], Source.COMPLAINT, date=cdates[i]) for i in range(n)]

    products, recalled, ptypes = _make_products(cfg, smp)
    reviews, review_labels = _reviews(cfg, smp, products, recalled, ptypes, cfg.n_reviews, "R")
    ev_pos, lab_pos = _reviews(cfg, smp, products, recalled, ptypes, cfg.n_eval_hazardous, "EH", fixed_label=1)
    ev_neg, lab_neg = _reviews(cfg, smp, products, recalled, ptypes, cfg.n_eval_benign, "EB", fixed_label=0)

    recalled_products = [p for p in products if p.recalled]
    recall_dates = smp.dates(_REVIEW_SPAN, len(recalled_products))
    recalls, recall_of = [], {}
    for prod, date in zip(recalled_products, recall_dates):
        brand, model, type_name = prod.title.split()
        rec = RecallRecord(
            recall_id=f"RC{prod.product_id[1:]}",
            recall_date=date,
            title=f"{brand.capitalize()} Recalls {model.capitalize()} {type_name.capitalize()}s",
            reason="synthetic recall",
        )
        recalls.append(rec)
        recall_of[prod.product_id] = rec.recall_id

    bias = max(cfg.product_types, key=lambda t: t.complaint_share / max(t.review_share, 1e-12))
    return SynthCorpus(
        config=cfg,
        complaints=Corpus(tuple(complaints), CorpusKind.POSITIVE_LABELED, name="complaints"),
        reviews=Corpus(tuple(reviews), CorpusKind.UNLABELED, name="reviews"),
        review_labels=review_labels,
        eval_reviews=Corpus(tuple(ev_pos + ev_neg), CorpusKind.UNLABELED, name="eval"),
        eval_labels={**lab_pos, **lab_neg},
        products=tuple(products),
        recalls=tuple(recalls),
        recall_of_product=recall_of,
        bias_tokens=bias.terms,
        hazard_tokens=cfg.hazard_vocab,
    )


def write_synth(sc: SynthCorpus, out_dir) -> dict[str, Path]:
    """Write every artifact in the corpus-module line formats.

    ``labels.jsonl`` is the hidden-label sidecar for ``reviews.jsonl``;
    ``eval.jsonl`` carries its labels inline (``label`` field).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / f"{name}.jsonl" for name in ("complaints", "reviews", "labels", "eval", "products", "recalls")}
    dump_corpus(sc.complaints, paths["complaints"])
    dump_corpus(sc.reviews, paths["reviews"])
    write_json_lines(({"id": d.id, "label": sc.review_labels[d.id]} for d in sc.reviews), paths["labels"])
    write_json_lines(({**document_record(d), "label": sc.eval_labels[d.id]} for d in sc.eval_reviews), paths["eval"])
    write_json_lines(({"product_id": p.product_id, "title": p.title} for p in sc.products), paths["products"])
    dump_recalls(sc.recalls, paths["recalls"])
    paths["planted"] = out / "planted.json"
    paths["planted"].write_text(
        json.dumps({"bias_tokens": list(sc.bias_tokens), "hazard_tokens": list(sc.hazard_tokens)}, indent=1) + "\n",
        encoding="utf-8",
    )
    return paths
