import json
import random

import pytest
from hypothesis import given, settings, strategies as st

import corpusgen
import oracles
from conftest import scorer_cmd
from bitext_sieve.core import (
    WHITESPACE,
    SentencePair,
    read_scored,
    tokenize,
    write_bitext,
)
from bitext_sieve.domain import DomainConfig, lm_scorer
from bitext_sieve.errors import ConfigError, DataError
from bitext_sieve.pipeline import (
    NormalizationStats,
    ScoringConfig,
    STATS_SUFFIX,
    combine,
    compute_stats,
    load_stats,
    minmax_normalize,
    quantize,
    run_scoring,
    score_pairs,
    select_by_budget,
    select_top_percent,
)


def test_minmax_examples():
    assert minmax_normalize([2, 4, 6]) == [0.0, 0.5, 1.0]
    assert minmax_normalize([5, 5, 5]) == [1.0, 1.0, 1.0]
    assert minmax_normalize([3.7]) == [1.0]
    with pytest.raises(DataError):
        minmax_normalize([])


def test_minmax_identity_on_unit_range():
    values = [0.0, 0.25, 0.5, 1.0]
    assert minmax_normalize(values) == values


@given(st.lists(st.floats(min_value=-100, max_value=100), min_size=2, max_size=30))
def test_minmax_preserves_order(values):
    normalized = minmax_normalize(values)
    for a, b in zip(range(len(values)), range(1, len(values))):
        if values[a] <= values[b]:
            assert normalized[a] <= normalized[b] + 1e-12


def test_combine_examples():
    assert combine(1.0, 0.8, 0.5) == pytest.approx(0.4)
    assert combine(0.0, 0.9, 0.9) == 0.0
    assert combine(1, 1, 1) == 1.0
    with pytest.raises(ConfigError):
        combine(1.2, 0.5, 0.5)
    with pytest.raises(ConfigError):
        combine(0.5, -0.1, 0.5)


def test_quantize_matches_serialization():
    for x in (1 / 3, 0.1234565, 0.9999996, 0.0, 1.0):
        assert quantize(x) == float(f"{x:.6f}")


def test_stats_round_trip(tmp_path):
    stats = compute_stats("c", [(1.0, 0.2, 3.0), (0.0, 0.8, 1.0)])
    path = tmp_path / "s.json"
    path.write_text(stats.to_json(), encoding="utf-8")
    back = load_stats(path)
    assert back == stats
    assert back.minima == {"lang": 0.0, "accept": 0.2, "domain": 1.0}
    assert back.maxima == {"lang": 1.0, "accept": 0.8, "domain": 3.0}


def test_normalize_domain_degenerate_range():
    stats = NormalizationStats("c", 2, {"domain": 5.0}, {"domain": 5.0})
    assert stats.normalize_domain(5.0) == 1.0


def test_scoring_config_needs_a_filter():
    with pytest.raises(ConfigError):
        ScoringConfig()


def test_scoring_config_langid_needs_languages(langid_model):
    with pytest.raises(ConfigError):
        ScoringConfig(langid_model=langid_model)


def test_absent_filters_are_neutral(accept_model, toy_pairs):
    config = ScoringConfig(accept_model=accept_model)
    partials = score_pairs(config, toy_pairs[:10])
    assert all(lang == 1.0 and dom == 1.0 for lang, _, dom in partials)
    assert all(0.0 < accept < 1.0 for _, accept, _ in partials)


def test_partials_are_quantized(accept_model, toy_pairs):
    config = ScoringConfig(accept_model=accept_model)
    for row in score_pairs(config, toy_pairs[:10]):
        for value in row:
            assert value == quantize(value)


def test_external_accept_skips_empty_sides():
    from bitext_sieve.acceptability import external_model

    pairs = [
        SentencePair(0, "a b", "a b"),
        SentencePair(1, "", "x"),
        SentencePair(2, "a", ""),
    ]
    config = ScoringConfig(accept_model=external_model(scorer_cmd("overlap")))
    partials = score_pairs(config, pairs)
    assert partials[0][1] == 1.0
    assert partials[1][1] == 0.0
    assert partials[2][1] == 0.0


def test_run_scoring_writes_scored_and_stats(tmp_path, accept_model, domain_lm, garbage_lm):
    pairs = corpusgen.parallel_corpus(40, seed=301)
    src = tmp_path / "in.tsv"
    out = tmp_path / "scored.tsv"
    write_bitext(pairs, src)
    config = ScoringConfig(
        accept_model=accept_model,
        domain=DomainConfig(lm_scorer(domain_lm), lm_scorer(garbage_lm)),
    )
    stats = run_scoring(src, out, config)
    rows = list(read_scored(out))
    assert len(rows) == 40
    sidecar = json.loads((tmp_path / ("scored.tsv" + STATS_SUFFIX)).read_text())
    assert sidecar["records"] == 40
    assert set(sidecar["filters"]) == {"lang", "accept", "domain"}
    # final column is exactly the product of the serialized partials
    for pair, vec in rows:
        assert vec.final == pytest.approx(
            vec.language * vec.acceptability * stats.normalize_domain(vec.domain),
            abs=5e-7,
        )


def test_run_scoring_empty_input_is_data_error(tmp_path, accept_model):
    src = tmp_path / "in.tsv"
    src.write_text("", encoding="utf-8")
    with pytest.raises(DataError):
        run_scoring(src, tmp_path / "out.tsv", ScoringConfig(accept_model=accept_model))


def make_rows(scores, words=None):
    words = words or [1] * len(scores)
    return [
        (SentencePair(i, "s", " ".join(["w"] * w)), s)
        for i, (s, w) in enumerate(zip(scores, words))
    ]


def test_select_by_budget_examples():
    rows = make_rows([0.9, 0.8, 0.1], words=[5, 5, 5])
    assert [p.id for p, _ in select_by_budget(rows, 10)] == [0, 1]
    assert [p.id for p, _ in select_by_budget(rows, 11)] == [0, 1, 2]
    assert [p.id for p, _ in select_by_budget(rows, 5)] == [0]
    assert [p.id for p, _ in select_by_budget(rows, 9999)] == [0, 1, 2]


def test_select_two_pair_ranking():
    rows = make_rows([0.9, 0.1], words=[3, 3])
    assert [p.id for p, _ in select_by_budget(rows, 3)] == [0]


def test_select_ties_break_by_id():
    rows = make_rows([0.5, 0.5, 0.5], words=[2, 2, 2])
    assert [p.id for p, _ in select_by_budget(rows, 4)] == [0, 1]


def test_select_validation():
    with pytest.raises(ConfigError):
        select_by_budget(make_rows([0.5]), 0)
    with pytest.raises(ConfigError):
        select_by_budget(make_rows([0.5]), 5, side="middle")
    with pytest.raises(ConfigError):
        select_top_percent(make_rows([0.5]), 0)
    with pytest.raises(ConfigError):
        select_top_percent(make_rows([0.5]), 101)


def test_top_percent_examples():
    rows = make_rows([0.1, 0.9, 0.5, 0.7])
    assert len(select_top_percent(rows, 100)) == 4
    assert [p.id for p, _ in select_top_percent(rows, 50)] == [1, 3]
    rows5 = make_rows([0.1, 0.9, 0.5, 0.7, 0.3])
    assert len(select_top_percent(rows5, 50)) == 3  # ceil(2.5)


def test_selection_matches_oracle_on_randomized_fixtures():
    rng = random.Random(9)
    for trial in range(100):
        scores = [rng.choice([0.1, 0.5, 0.5, 0.9, rng.random()]) for _ in range(100)]
        words = [rng.randint(1, 12) for _ in range(100)]
        rows = make_rows(scores, words)
        budget = rng.randint(1, sum(words) + 10)
        got = select_by_budget(rows, budget)
        want = oracles.budget_selection_oracle(
            rows, budget, lambda p: len(tokenize(p.target, WHITESPACE))
        )
        assert got == want
        pct = rng.choice([1, 10, 33.3, 50, 100])
        assert select_top_percent(rows, pct) == oracles.top_percent_oracle(rows, pct)


def test_budget_prefix_is_score_optimal_among_same_size_subsets():
    rng = random.Random(31)
    scores = [rng.random() for _ in range(30)]
    rows = make_rows(scores, words=[1] * 30)
    picked = select_by_budget(rows, 10)
    total = sum(s for _, s in picked)
    assert total == pytest.approx(sum(sorted(scores, reverse=True)[:10]))
