import datetime as dt

import pytest
from hypothesis import given
from hypothesis import strategies as st

from recallwatch.corpus import RecallRecord
from recallwatch.recall_match import (
    ProductMatch,
    ReviewPrediction,
    has_category_keyword,
    hazard_rates,
    lead_time,
    match_recalls,
    offset_days,
    offset_histogram,
    read_matches,
    read_predictions,
    title_terms,
    write_cumulative,
    write_matches,
    write_offsets,
    write_predictions,
)

D = dt.date
KOLCRAFT = RecallRecord("RC1", D(2012, 7, 24), "Kolcraft Recalls Contours Tandem Strollers")
GREGORIAN_CYCLE = 146_097  # days in 400 years


# matching ---------------------------------------------------------------------

def test_kolcraft_match():
    (m,) = match_recalls([KOLCRAFT], [("P1", "Contours Options Tandem Stroller")])
    assert {"contours", "tandem"} <= set(m.shared_terms)
    assert m.product_id == "P1" and m.recall_id == "RC1"
    assert m.verified is False


def test_one_or_zero_shared_terms_do_not_match():
    products = [("P1", "Contours Bassinet"), ("P2", "Graco Swing")]
    assert match_recalls([KOLCRAFT], products) == []


def test_stop_terms_are_not_evidence():
    rec = RecallRecord("RC2", D(2010, 1, 1), "Acme Recalls Strollers Due to Fall Hazard")
    assert "recalls" not in title_terms(rec.title) and "due" not in title_terms(rec.title)
    assert match_recalls([rec], [("P1", "recalls due stroller")]) == []


def test_category_filter():
    rec = RecallRecord("RC3", D(2010, 1, 1), "Kolcraft Recalls Contours Tandem Lamps")
    assert not has_category_keyword(rec.title, ["stroller", "car seat"])
    assert match_recalls([rec], [("P1", "Contours Tandem Lamp")]) == []
    assert has_category_keyword("Evenflo Recalls Infant Car Seats", ["car seat"])
    assert not has_category_keyword("Scarf Recall", ["car seat"])


def test_matching_is_deterministic_and_symmetric():
    recalls = [KOLCRAFT, RecallRecord("RC4", D(2011, 5, 1), "Graco Recalls Quattro Tour Strollers")]
    products = [("P2", "Graco Quattro Tour Stroller"), ("P1", "Contours Options Tandem Stroller")]
    a = match_recalls(recalls, products)
    assert a == match_recalls(recalls, products)
    for m in a:
        rec = next(r for r in recalls if r.recall_id == m.recall_id)
        title = dict(products)[m.product_id]
        assert set(m.shared_terms) == title_terms(rec.title) & title_terms(title)


def test_product_match_needs_two_terms():
    with pytest.raises(ValueError):
        ProductMatch("R", "P", ("one",))


# offsets ----------------------------------------------------------------------

def test_offset_fixtures():
    assert offset_days(D(2010, 12, 10), D(2012, 7, 24)) == -592
    assert offset_days(D(2013, 4, 30), D(2014, 6, 4)) == -400
    assert offset_days(D(2012, 7, 24), D(2012, 7, 24)) == 0


dates = st.dates(min_value=D(1601, 1, 1), max_value=D(9000, 12, 31))


@given(dates, dates)
def test_offset_antisymmetry_and_cycle(a, b):
    assert offset_days(a, b) == -offset_days(b, a)
    assert offset_days(a, a) == 0
    a4, b4 = a.replace(year=a.year + 400), b.replace(year=b.year + 400)
    assert offset_days(a4, b4) == offset_days(a, b)
    assert offset_days(a4, a) == GREGORIAN_CYCLE


def _preds(product, n, hazardous_dates, start=D(2010, 1, 1)):
    out = [ReviewPrediction(f"{product}-h{i}", product, d, True, 0.9) for i, d in enumerate(hazardous_dates)]
    out += [ReviewPrediction(f"{product}-b{i}", product, start, False, 0.1) for i in range(n - len(hazardous_dates))]
    return out


def _report(min_reviews=10):
    recalls = [KOLCRAFT, RecallRecord("RC5", D(2014, 6, 4), "Baby Trend Recalls Nursery Center Bassinet")]
    matches = [ProductMatch("RC1", "P1", ("contours", "tandem")), ProductMatch("RC5", "P2", ("nursery", "center")),
               ProductMatch("RC5", "P3", ("nursery", "center"))]
    preds = (_preds("P1", 12, [D(2010, 12, 10), D(2011, 3, 1), D(2011, 3, 1), D(2013, 1, 1)])
             + _preds("P2", 10, [D(2013, 4, 30)])
             + _preds("P3", 9, [D(2013, 4, 30)]))
    return lead_time(preds, matches, recalls, min_reviews)


def test_lead_time_report():
    rep = _report()
    assert rep.excluded_products == ["P3"]
    assert rep.review_counts == {"P1": 12, "P2": 10}
    assert [o.offset_days for o in rep.offsets if o.product_id == "P2"] == [-400]
    assert rep.offsets[0].offset_days == -592
    assert rep.products_with_early_warning == ["P1", "P2"]
    assert rep.early_warning_fraction == 1.0
    assert "2/2 products" in rep.summary()


def test_offset_sign_matches_order():
    for o in _report().offsets:
        assert (o.offset_days < 0) == (o.review_date < o.recall_date)


def test_cumulative_series():
    rep = _report()
    for pid, series in rep.cumulative.items():
        counts = [c for _, c in series]
        days = [d for d, _ in series]
        assert counts == sorted(counts) and days == sorted(days) and len(set(days)) == len(days)
        assert counts[-1] == rep.hazard_counts[pid]
    assert rep.cumulative["P1"] == [(D(2010, 12, 10), 1), (D(2011, 3, 1), 3), (D(2013, 1, 1), 4)]


def test_min_reviews_threshold():
    assert "P3" in _report(min_reviews=9).review_counts
    assert _report(min_reviews=13).review_counts == {}


def test_lead_time_errors():
    with pytest.raises(ValueError, match="matches no recall"):
        lead_time([ReviewPrediction("r", "P9", D(2010, 1, 1), True)], [], [KOLCRAFT])
    m = [ProductMatch("RC1", "P1", ("a", "b"))]
    with pytest.raises(ValueError, match="no date"):
        lead_time([ReviewPrediction("r", "P1", None, True)], m, [KOLCRAFT], min_reviews=1)


def test_earliest_recall_dates_a_product():
    recalls = [KOLCRAFT, RecallRecord("RC0", D(2011, 1, 1), "Kolcraft Recalls Contours Strollers")]
    matches = [ProductMatch("RC1", "P1", ("a", "b")), ProductMatch("RC0", "P1", ("a", "b"))]
    rep = lead_time([ReviewPrediction("r", "P1", D(2010, 12, 31), True)], matches, recalls, min_reviews=1)
    assert rep.offsets[0].offset_days == -1


def test_histogram():
    # offsets -592, -511, -511, -400 and +161
    assert offset_histogram(_report(), bin_days=365) == [(-730, 4), (0, 1)]


# rates --------------------------------------------------------------------------

def test_rate_values_and_partition():
    preds = _preds("A", 100, [D(2010, 1, 1)] * 3) + _preds("B", 50, [D(2010, 1, 1)] * 4)
    r = hazard_rates(preds, {"A"})
    assert r.rate_recalled == 0.03 and r.rate_other == 0.08
    overall = sum(p.hazardous for p in preds) / len(preds)
    assert (100 * r.rate_recalled + 50 * r.rate_other) / 150 == pytest.approx(overall)
    assert r.watchlist() == [("B", 4, 0.9), ("A", 3, 0.9)]


def test_rates_need_both_groups():
    with pytest.raises(ValueError, match="non-recalled"):
        hazard_rates(_preds("A", 5, []), {"A"})


@pytest.mark.slow
def test_planted_rate_ratio(default_worlds):
    for w in default_worlds:
        recalled = {p.product_id for p in w.sc.products if p.recalled}
        preds = [ReviewPrediction(d.id, d.product_id, d.date, bool(w.sc.review_labels[d.id])) for d in w.sc.reviews]
        r = hazard_rates(preds, recalled)
        assert 1.5 <= r.rate_recalled / r.rate_other <= 2.5


# files --------------------------------------------------------------------------

def test_file_round_trips(tmp_path):
    matches = match_recalls([KOLCRAFT], [("P1", "Contours Options Tandem Stroller")])
    write_matches(matches, tmp_path / "m.csv")
    assert read_matches(tmp_path / "m.csv") == matches
    preds = _preds("P1", 3, [D(2011, 2, 3)])
    write_predictions(preds, tmp_path / "p.csv")
    assert read_predictions(tmp_path / "p.csv") == preds
    rep = _report()
    write_offsets(rep, tmp_path / "o.csv")
    write_cumulative(rep, tmp_path / "c.csv")
    assert (tmp_path / "o.csv").read_text().splitlines()[0] == "product_id,review_id,offset_days"
    assert (tmp_path / "c.csv").read_text().splitlines()[1] == "P1,2010-12-10,1"


def test_bad_prediction_row(tmp_path):
    (tmp_path / "p.csv").write_text("review_id,product_id,date,score,hazardous\nr1,P1,2010-13-01,0.5,1\n")
    with pytest.raises(ValueError, match="p.csv:2"):
        read_predictions(tmp_path / "p.csv")
