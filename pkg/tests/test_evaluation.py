import pytest

from tripletag.errors import SentenceCountMismatch
from tripletag.evaluation import (
    MatchMode,
    PRF,
    breakdown_csv,
    ensemble_merge,
    facet_length,
    length_breakdown,
    report_lines,
    score,
    spans_overlap,
    triplets_overlap,
)
from tripletag.tagging import Span, Triplet

T = Triplet.make


def test_spans_overlap():
    assert spans_overlap(Span(2, 3), Span(3, 5))
    assert not spans_overlap(Span(0, 1), Span(2, 4))
    assert spans_overlap(Span(4, 4), Span(4, 4))


def test_triplets_overlap():
    a = T((0, 1), (3, 3), "POS")
    assert triplets_overlap(a, a)
    assert not triplets_overlap(a, T((1, 1), (4, 4), "POS"))
    assert not triplets_overlap(a, T((5, 5), (3, 3), "POS"))


def test_score_basic():
    g = [[T((0, 0), (2, 2), "POS")]]
    assert score(g, g) == PRF(1.0, 1.0, 1.0, 1, 1, 1)
    empty = score(g, [[]])
    assert (empty.precision, empty.recall, empty.f1) == (0.0, 0.0, 0.0)
    assert score([[]], [[]]).f1 == 0.0


def test_partial_match_off_by_one():
    g = [[T((9, 10), (5, 5), "POS")]]
    p = [[T((10, 10), (5, 5), "POS")]]
    assert score(g, p, MatchMode.EXACT).matched == 0
    assert score(g, p, MatchMode.PARTIAL_TARGET).matched == 1
    assert score(g, p, "partial-opinion").matched == 0
    wrong_sent = [[T((10, 10), (5, 5), "NEG")]]
    assert score(g, wrong_sent, MatchMode.PARTIAL_TARGET).matched == 0


def test_each_gold_matched_once():
    g = [[T((0, 1), (3, 3), "POS")]]
    p = [[T((0, 0), (3, 3), "POS"), T((1, 1), (3, 3), "POS")]]
    r = score(g, p, MatchMode.PARTIAL_TARGET)
    assert (r.matched, r.predicted, r.gold) == (1, 2, 1)


def test_sentence_count_mismatch():
    with pytest.raises(SentenceCountMismatch):
        score([[]], [[], []])


def test_facet_lengths(example_triplets):
    second = T((9, 10), (5, 5), "POS")
    assert facet_length(second, "target_len") == 2
    assert facet_length(second, "opinion_len") == 1
    assert facet_length(second, "offset_len") == 4


def test_length_breakdown():
    g = [[T((0, 1), (3, 3), "POS")]]
    rows = length_breakdown(g, g, "target_len")
    assert list(rows) == [2] and rows[2].f1 == 1.0
    wrong = length_breakdown(g, [[T((0, 1), (4, 4), "POS")]], "target_len")
    assert all(r.f1 == 0.0 for r in wrong.values())
    csv = breakdown_csv(rows, "target_len")
    assert csv.splitlines()[1].startswith("target_len,2,1.000000")


def test_ensemble_merge():
    a = T((0, 0), (2, 2), "POS")
    a2 = T((0, 1), (2, 2), "POS")
    b = T((5, 5), (7, 7), "NEG")
    assert ensemble_merge([{a}], [{a2, b}]) == [{a, b}]
    assert ensemble_merge([{a}], [set()]) == [{a}]
    gold = [[a, b]]
    assert score(gold, ensemble_merge([{a}], [{b}])).recall >= score(gold, [{a}]).recall


def test_report_lines():
    text = report_lines(PRF.from_counts(1, 1, 1), "exact")
    assert text.startswith("mode=exact precision=1.000000")
    assert "1.000" in text.splitlines()[-1]
