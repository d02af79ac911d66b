import math

import pytest
from hypothesis import given, strategies as st

from bitext_sieve.core import ScoreVector, SentencePair
from bitext_sieve.errors import ConfigError, DataError
from bitext_sieve.evaluate import (
    HISTOGRAM_BINS,
    Histogram,
    corpus_stats,
    parse_grid,
    pr_curve,
    precision_recall_at,
)

SCORES = [0.95, 0.8, 0.4, 0.1]
LABELS = [1, 1, 0, 0]


def test_four_item_fixture():
    mid = precision_recall_at(SCORES, LABELS, 0.5)
    assert (mid.precision, mid.recall) == (1.0, 1.0)
    high = precision_recall_at(SCORES, LABELS, 0.99)
    assert (high.precision, high.recall) == (1.0, 0.0)
    low = precision_recall_at(SCORES, LABELS, 0.0)
    assert (low.precision, low.recall) == (0.5, 1.0)


def test_no_predictions_is_precision_one():
    point = precision_recall_at(SCORES, LABELS, 0.99)
    assert point.predicted == 0
    assert point.precision == 1.0


def test_positives_required():
    with pytest.raises(DataError):
        precision_recall_at([0.5, 0.6], [0, 0], 0.5)


def test_length_mismatch():
    with pytest.raises(DataError):
        precision_recall_at([0.5], [1, 0], 0.5)


def test_all_positive_labels_give_unit_precision():
    for t in (0.0, 0.3, 0.7):
        assert precision_recall_at(SCORES, [1, 1, 1, 1], t).precision == 1.0


def test_threshold_zero_captures_everything():
    point = precision_recall_at(SCORES, LABELS, 0.0)
    assert point.recall == 1.0
    assert point.predicted == len(SCORES)


def test_recall_non_increasing_in_threshold():
    grid = [i / 20 for i in range(21)]
    points = pr_curve(SCORES, LABELS, grid)
    recalls = [p.recall for p in points]
    assert all(a >= b for a, b in zip(recalls, recalls[1:]))


@given(
    st.lists(
        st.tuples(st.floats(min_value=0, max_value=1), st.integers(0, 1)),
        min_size=2,
        max_size=50,
    ).filter(lambda rows: any(l == 1 for _, l in rows)),
    st.floats(min_value=0, max_value=1),
)
def test_precision_times_predicted_counts_true_positives(rows, threshold):
    scores = [s for s, _ in rows]
    labels = [l for _, l in rows]
    point = precision_recall_at(scores, labels, threshold)
    if point.predicted:
        assert point.precision * point.predicted == pytest.approx(point.true_positives)


def test_curve_is_pointwise_consistent():
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    points = pr_curve(SCORES, LABELS, grid)
    assert points == [precision_recall_at(SCORES, LABELS, t) for t in grid]


def test_curve_grid_validation():
    with pytest.raises(ConfigError):
        pr_curve(SCORES, LABELS, [])
    with pytest.raises(ConfigError):
        pr_curve(SCORES, LABELS, [0.5, 0.5])
    with pytest.raises(ConfigError):
        pr_curve(SCORES, LABELS, [0.9, 0.1])


def test_parse_grid():
    assert parse_grid("0:1:0.25") == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert parse_grid("0:1:0.05")[-1] == pytest.approx(1.0)
    assert len(parse_grid("0:1:0.05")) == 21
    for bad in ("0:1", "a:b:c", "0:1:0", "1:0:0.1", "0:1:-0.5"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_histogram_has_32_bins_summing_to_count():
    values = [i / 99 for i in range(100)]
    hist = Histogram.build(values, 0.0, 1.0)
    assert len(hist.counts) == HISTOGRAM_BINS
    assert len(hist.edges) == HISTOGRAM_BINS + 1
    assert sum(hist.counts) == 100
    assert hist.edges[0] == 0.0
    assert hist.edges[-1] == pytest.approx(1.0)


def test_histogram_top_edge_is_inclusive():
    hist = Histogram.build([1.0, 1.0], 0.0, 1.0)
    assert hist.counts[-1] == 2


def make_row(i, lang=1.0, accept=0.5, domain=1.0, final=0.5, src="a b", tgt="x y z"):
    return (SentencePair(i, src, tgt), ScoreVector(lang, accept, domain, final))


def test_corpus_stats_counts_words_and_zeroes():
    rows = [
        make_row(0, final=0.5),
        make_row(1, lang=0.0, final=0.0),
        make_row(2, accept=0.0, final=0.0, src="one", tgt="two"),
    ]
    report = corpus_stats(rows)
    assert report.records == 3
    assert report.source_words == 2 + 2 + 1
    assert report.target_words == 3 + 3 + 1
    assert report.zero_fraction["final"] == pytest.approx(2 / 3)
    assert report.zero_fraction["lang"] == pytest.approx(1 / 3)
    assert sum(report.histograms["final"].counts) == 3


def test_corpus_stats_empty_stream_is_zeroed():
    report = corpus_stats([])
    assert report.records == 0
    assert report.source_words == 0
    assert report.target_words == 0
    assert all(f == 0.0 for f in report.zero_fraction.values())
    assert all(sum(h.counts) == 0 for h in report.histograms.values())
    doc = report.to_doc()
    assert set(doc) == {
        "records", "source_words", "target_words", "histograms", "zero_fraction",
    }


def test_corpus_stats_histogram_extends_beyond_one_for_raw_domain():
    rows = [make_row(0, domain=4.5), make_row(1, domain=0.2)]
    report = corpus_stats(rows)
    assert report.histograms["domain"].edges[-1] == pytest.approx(4.5)
    assert sum(report.histograms["domain"].counts) == 2


def test_report_rendering_writes_png(tmp_path):
    from bitext_sieve.report import render_pr_curve, render_score_histograms

    points = pr_curve(SCORES, LABELS, [0.0, 0.5, 0.99])
    pr_png = render_pr_curve(points, tmp_path / "pr.png")
    assert pr_png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    report = corpus_stats([make_row(0), make_row(1, final=0.9)])
    hist_png = render_score_histograms(report, tmp_path / "hist.png")
    assert hist_png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
