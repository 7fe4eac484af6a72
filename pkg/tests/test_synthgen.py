import json
import math

import numpy as np
import pytest

from recallwatch.corpus import CorpusKind, load_corpus, load_labels, load_recalls
from recallwatch.recall_match import CATEGORY_KEYWORDS, has_category_keyword, match_recalls
from recallwatch.synthgen import DEFAULT_TYPES, ProductType, SynthConfig, generate, write_synth

from conftest import SMALL

MEDIUM = dict(n_complaints=2_000, n_reviews=20_000, n_products=500, n_eval_hazardous=20, n_eval_benign=20)


def type_doc_fraction(corpus, ptype):
    terms = set(ptype.terms)
    docs = list(corpus)
    return sum(1 for d in docs if terms & set(d.text.split())) / len(docs)


def shifted(a_complaint=0.6, a_review=0.1):
    rest_c, rest_r = (1 - a_complaint) / 2, (1 - a_review) / 2
    return (
        ProductType("alpha", a_complaint, a_review, ("alpha", "alphas")),
        ProductType("beta", rest_c, rest_r, ("beta",)),
        ProductType("gamma", rest_c, rest_r, ("gamma",)),
    )


def test_zero_hazard_rate():
    sc = generate(SynthConfig(seed=1, hazard_rate=0.0, n_reviews=1_000, n_complaints=50, n_products=50,
                              n_eval_hazardous=5, n_eval_benign=5))
    assert sum(sc.review_labels.values()) == 0


def test_same_seed_gives_identical_files(tmp_path):
    cfg = SynthConfig(seed=3, **SMALL)
    a = write_synth(generate(cfg), tmp_path / "a")
    b = write_synth(generate(cfg), tmp_path / "b")
    assert a.keys() == b.keys()
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes(), key


def test_different_seeds_differ():
    a, b = generate(SynthConfig(seed=0, **SMALL)), generate(SynthConfig(seed=1, **SMALL))
    assert [d.text for d in a.reviews][:50] != [d.text for d in b.reviews][:50]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_planted_type_ratio(seed):
    cfg = SynthConfig(seed=seed, product_types=shifted(), hazard_rate=0.05, **MEDIUM)
    sc = generate(cfg)
    hazardous = [d for d in sc.reviews if sc.review_labels[d.id]]
    alpha = cfg.product_types[0]
    in_complaints = type_doc_fraction(sc.complaints, alpha)
    in_hazardous = sum(1 for d in hazardous if set(alpha.terms) & set(d.text.split())) / len(hazardous)
    assert 3.0 <= in_complaints / in_hazardous <= 12.0


@pytest.mark.parametrize("seed", [0, 1])
def test_type_shares_within_4_sigma(seed):
    sc = generate(SynthConfig(seed=seed, **MEDIUM))
    for t in DEFAULT_TYPES:
        for corpus, share in ((sc.complaints, t.complaint_share), (sc.reviews, t.review_share)):
            n = len(corpus)
            sigma = math.sqrt(share * (1 - share) / n)
            assert abs(type_doc_fraction(corpus, t) - share) <= 4 * sigma, (t.name, share)


def test_every_document_names_one_type():
    sc = generate(SynthConfig(seed=0, **SMALL))
    for d in list(sc.complaints)[:300] + list(sc.reviews)[:1000]:
        words = set(d.text.split())
        assert sum(1 for t in DEFAULT_TYPES if words & set(t.terms)) == 1


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_hazard_fraction_near_rate(seed):
    cfg = SynthConfig(seed=seed, n_reviews=20_000, hazard_rate=0.02, n_complaints=10, n_products=200,
                      n_eval_hazardous=1, n_eval_benign=1)
    frac = np.mean(list(generate(cfg).review_labels.values()))
    assert abs(frac - cfg.hazard_rate) <= 0.2 * cfg.hazard_rate


def test_hazardous_reviews_rate_lower():
    sc = generate(SynthConfig(seed=0, **SMALL))
    by = {0: [], 1: []}
    for d in sc.reviews:
        by[sc.review_labels[d.id]].append(d.star_rating)
    assert np.mean(by[1]) < np.mean(by[0]) - 1.0


def test_document_lengths():
    sc = generate(SynthConfig(seed=0, **SMALL))
    lengths = np.array([len(d.text.split()) for d in sc.reviews])
    assert lengths.min() >= sc.config.min_length
    assert abs(lengths.mean() - sc.config.mean_length) < 2.0


def test_corpus_kinds_and_ids():
    sc = generate(SynthConfig(seed=0, **SMALL))
    assert sc.complaints.kind is CorpusKind.POSITIVE_LABELED
    assert sc.reviews.kind is CorpusKind.UNLABELED
    assert set(sc.review_labels) == set(sc.reviews.ids)
    assert sum(sc.eval_gold) == SMALL["n_eval_hazardous"]
    assert sc.bias_tokens == ("crib", "mattress", "slats")


def test_recalls_match_their_products():
    sc = generate(SynthConfig(seed=0, **SMALL))
    products = [(p.product_id, p.title) for p in sc.products]
    found = {(m.recall_id, m.product_id) for m in match_recalls(sc.recalls, products)}
    titles = {r.recall_id: r.title for r in sc.recalls}
    expected = {(rid, pid) for pid, rid in sc.recall_of_product.items() if has_category_keyword(titles[rid], CATEGORY_KEYWORDS)}
    assert expected and expected <= found
    # brand and model numbers are unique per product, so nothing else matches
    assert found == expected


def test_labels_do_not_leak(tmp_path):
    sc = generate(SynthConfig(seed=0, **SMALL))
    paths = write_synth(sc, tmp_path)
    for line in paths["reviews"].read_text().splitlines()[:200]:
        rec = json.loads(line)
        assert not {"label", "hazardous", "gold"} & set(rec)
    reviews = load_corpus(paths["reviews"], CorpusKind.UNLABELED)
    assert reviews == sc.reviews
    assert load_labels(paths["labels"]) == sc.review_labels
    assert load_recalls(paths["recalls"]) == list(sc.recalls)
    planted = json.loads(paths["planted"].read_text())
    assert planted["bias_tokens"] == list(sc.bias_tokens)


@pytest.mark.parametrize("kwargs", [
    dict(product_types=(ProductType("a", 0.5, 0.5, ("a",)),)),
    dict(hazard_rate=1.0),
    dict(hazard_vocab=("crib",)),
    dict(min_length=50),
])
def test_invalid_configs(kwargs):
    with pytest.raises(ValueError):
        SynthConfig(**kwargs)
