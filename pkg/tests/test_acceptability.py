import json
import math

import pytest
from hypothesis import given, settings, strategies as st

import corpusgen
from conftest import scorer_cmd
from bitext_sieve.acceptability import (
    FEATURE_NAMES,
    AcceptTrainConfig,
    acceptability_score,
    extract_features,
    external_model,
    load_accept,
    mine_unsupervised_positives,
    save_accept,
    train_builtin,
)
from bitext_sieve.core import SentencePair
from bitext_sieve.errors import ConfigError, DataError
from bitext_sieve.synth import CorruptionPolicy, LabeledRecord, LabeledSet, build_training_set


def features(src, tgt, lexicons=({}, {})):
    return extract_features(SentencePair(0, src, tgt), lexicons[0], lexicons[1])


def test_length_ratio_clamped():
    long_src = " ".join(["w"] * 500)
    assert features(long_src, "x").length_ratio == 10.0
    assert features("x", long_src).length_ratio == 0.1
    assert features("a b", "x y").length_ratio == 1.0


def test_length_ratio_empty_side_conventions():
    assert features("", "").length_ratio == 1.0
    assert features("a", "").length_ratio == 10.0
    assert features("", "b").length_ratio == 0.1


def test_log_length_ratio_consistent():
    f = features("a b c", "x y")
    assert f.log_length_ratio == pytest.approx(math.log(f.length_ratio))


def test_swapping_sides_inverts_ratio():
    f = features("a b c d e f", "x y z")
    g = features("x y z", "a b c d e f")
    assert g.length_ratio == pytest.approx(1.0 / f.length_ratio)


def test_literal_overlap_jaccard():
    f = features("send 100 dollars to a@b.com", "envoyez 100 dollars a a@b.com")
    assert f.literal_overlap == 1.0  # {100, a@b.com} on both sides
    g = features("pay 50 now", "payez 60 maintenant")
    assert g.literal_overlap == 0.0
    h = features("no numbers here", "rien du tout")
    assert h.literal_overlap == 1.0  # both empty -> vacuous agreement


def test_copy_ratio_detects_untranslated_text():
    f = features("identical sentence", "identical sentence")
    assert f.copy_ratio == 1.0
    g = features("abcdefgh", "zzzzzzzz")
    assert g.copy_ratio < 0.2


def test_coverage_with_perfect_lexicon():
    lexicon = {"cat": {"chat": 1.0}, "dog": {"chien": 1.0}}
    back = {"chat": {"cat": 1.0}, "chien": {"dog": 1.0}}
    f = features("cat dog", "chat chien", (lexicon, back))
    assert f.forward_coverage == 1.0
    assert f.backward_coverage == 1.0
    g = features("cat bird", "chat chien", (lexicon, back))
    assert g.forward_coverage == 0.5
    assert g.backward_coverage == 0.5  # chien's translation "dog" is absent


def test_monotonicity_feature():
    lexicon = {c: {c.upper(): 1.0} for c in "abcdef"}
    back = {c.upper(): {c: 1.0} for c in "abcdef"}
    ordered = features("a b c d e f", "A B C D E F", (lexicon, back))
    reversed_ = features("a b c d e f", "F E D C B A", (lexicon, back))
    assert ordered.monotonicity == 1.0
    assert reversed_.monotonicity == 0.0
    f = features("a b", "", (lexicon, back))
    assert f.monotonicity == 0.5  # fewer than 2 matches -> neutral


def test_feature_vector_shape():
    arr = features("a b", "x y").as_array()
    assert arr.shape == (len(FEATURE_NAMES),)
    assert len(FEATURE_NAMES) == 7


def test_builtin_scores_strictly_inside_unit_interval(accept_model, toy_pairs):
    for pair in toy_pairs[:50]:
        s = acceptability_score(accept_model, pair)
        assert 0.0 < s < 1.0


def test_empty_side_scores_zero(accept_model):
    assert acceptability_score(accept_model, SentencePair(0, "", "x")) == 0.0
    assert acceptability_score(accept_model, SentencePair(0, "x", "")) == 0.0
    assert acceptability_score(accept_model, SentencePair(0, " ", " ")) == 0.0


def test_positive_negative_margin(accept_model, labeled_set):
    pos = [acceptability_score(accept_model, r.pair) for r in labeled_set.positives()]
    neg = [acceptability_score(accept_model, r.pair) for r in labeled_set.negatives()]
    assert sum(pos) / len(pos) - sum(neg) / len(neg) >= 0.2


def test_training_needs_both_classes(toy_pairs):
    only_pos = LabeledSet(tuple(LabeledRecord(p, 1, "none") for p in toy_pairs[:20]))
    with pytest.raises(DataError):
        train_builtin(only_pos, AcceptTrainConfig(seed=1))


def test_training_is_deterministic(labeled_set):
    a = train_builtin(labeled_set, AcceptTrainConfig(seed=5, epochs=50))
    b = train_builtin(labeled_set, AcceptTrainConfig(seed=5, epochs=50))
    assert a.weights.tolist() == b.weights.tolist()
    assert a.bias == b.bias


def test_train_config_validation():
    with pytest.raises(ConfigError):
        AcceptTrainConfig(epochs=0)
    with pytest.raises(ConfigError):
        AcceptTrainConfig(learning_rate=-1)
    with pytest.raises(ConfigError):
        AcceptTrainConfig(em_iterations=-1)
    with pytest.raises(ConfigError):
        AcceptTrainConfig(lexicon_min_prob=1.5)


def test_save_load_round_trip(accept_model, tmp_path, toy_pairs):
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "a2.json"
    save_accept(accept_model, p1)
    loaded = load_accept(p1)
    save_accept(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()
    for pair in toy_pairs[:10]:
        assert acceptability_score(loaded, pair) == acceptability_score(accept_model, pair)


def test_external_model_cannot_be_saved(tmp_path):
    model = external_model("true")
    with pytest.raises(ConfigError):
        save_accept(model, tmp_path / "x.json")


def test_external_model_scores_through_protocol():
    model = external_model(scorer_cmd("overlap"))
    try:
        same = acceptability_score(model, SentencePair(0, "a b c", "a b c"))
        disjoint = acceptability_score(model, SentencePair(1, "a b", "x y"))
        empty = acceptability_score(model, SentencePair(2, "", "x"))
    finally:
        model.close()
    assert same == 1.0
    assert disjoint == 0.0
    assert empty == 0.0  # empty-side rule applies before the wire


def test_mine_unsupervised_positives_product_mode(domain_lm, garbage_lm):
    from bitext_sieve.align import AlignmentParams, pair_alignment_score
    from bitext_sieve.domain import DomainConfig, domain_score, lm_scorer

    good = corpusgen.parallel_corpus(60, seed=201)
    noisy, labels = corpusgen.mispair(good, 0.5, seed=202)
    dictionary = {s: frozenset({t}) for s, t in corpusgen.LEXICON.items()}
    align_params = AlignmentParams(dictionary=dictionary)
    dom_cfg = DomainConfig(lm_scorer(domain_lm), lm_scorer(garbage_lm))
    triples = [
        (p, pair_alignment_score(p, align_params), domain_score(dom_cfg, p))
        for p in noisy
    ]
    mined = mine_unsupervised_positives(triples, budget_words=200, mode="product")
    mined_ids = {p.id for p in mined}
    kept_true = sum(1 for p, y in zip(noisy, labels) if p.id in mined_ids and y == 1)
    assert kept_true / len(mined_ids) >= 0.8


def test_mine_sequential_mode_filters_then_ranks(domain_lm, garbage_lm):
    from bitext_sieve.align import AlignmentParams, pair_alignment_score

    pairs = corpusgen.parallel_corpus(30, seed=205)
    params = AlignmentParams()
    # give half the pairs an out-of-domain (garbage) domain score of zero
    triples = []
    for i, p in enumerate(pairs):
        dom = 0.0 if i % 2 else 5.0
        triples.append((p, pair_alignment_score(p, params), dom))
    mined = mine_unsupervised_positives(
        triples, budget_words=10_000, mode="sequential", domain_threshold=0.5
    )
    assert {p.id for p in mined} == {p.id for i, p in enumerate(pairs) if i % 2 == 0}
