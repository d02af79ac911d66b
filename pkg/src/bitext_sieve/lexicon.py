"""Probabilistic translation lexicon via IBM-Model-1 style EM.

t(target_token | source_token) tables, normalized per source token.
Zero iterations returns the uniform co-occurrence initialization.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable

from .core import WHITESPACE, SentencePair, tokenize
from .errors import ConfigError, DataError

MIN_PAIRS = 10

Lexicon = dict[str, dict[str, float]]


def learn_lexicon(
    pairs: Iterable[SentencePair],
    iterations: int = 5,
    source_scheme: str = WHITESPACE,
    target_scheme: str = WHITESPACE,
    min_pairs: int = MIN_PAIRS,
) -> Lexicon:
    """EM over aligned pairs; probabilities per source token sum to 1."""
    if iterations < 0:
        raise ConfigError(f"iterations must be >= 0, got {iterations}")
    corpus = [
        (tokenize(p.source, source_scheme).tokens, tokenize(p.target, target_scheme).tokens)
        for p in pairs
    ]
    corpus = [(s, t) for s, t in corpus if s and t]
    if len(corpus) < min_pairs:
        raise DataError(f"need at least {min_pairs} non-empty pairs, got {len(corpus)}")

    # Uniform over each source token's co-occurring target types.
    cooc: dict[str, set[str]] = defaultdict(set)
    for src, tgt in corpus:
        for s in src:
            cooc[s].update(tgt)
    table: Lexicon = {
        s: {t: 1.0 / len(ts) for t in sorted(ts)} for s, ts in cooc.items()
    }

    for _ in range(iterations):
        counts: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        totals: dict[str, float] = defaultdict(float)
        for src, tgt in corpus:
            for t in tgt:
                denom = sum(table[s].get(t, 0.0) for s in src)
                if denom == 0.0:
                    continue
                for s in src:
                    p = table[s].get(t, 0.0)
                    if p:
                        share = p / denom
                        counts[s][t] += share
                        totals[s] += share
        table = {
            s: {t: c / totals[s] for t, c in sorted(ts.items())}
            for s, ts in counts.items()
            if totals[s] > 0
        }
    return table


def swap_pairs(pairs: Iterable[SentencePair]) -> list[SentencePair]:
    """Source/target swapped view, for learning the reverse lexicon."""
    return [
        SentencePair(id=p.id, source=p.target, target=p.source, meta=p.meta) for p in pairs
    ]
