"""Domain filter: perplexity ratio of a non-domain to an in-domain LM.

The raw score for a pair is PPL_N(target) / PPL_I(target); fluent
in-domain text scores high because the in-domain model finds it easy. A
cutoff zeroes everything at or below the threshold, then a clip caps the
survivors, so the score lands in {0} union (cutoff, clip].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .core import SentencePair, WHITESPACE, tokenize
from .errors import ConfigError
from .ngram_lm import NGramLM, perplexity

# Either a trained model or any callable mapping tokens to a perplexity,
# e.g. an adapter over an external scorer.
PerplexityScorer = Callable[[Sequence[str]], float]

DEFAULT_CLIP = 5.0
DEFAULT_CUTOFF = 1.5


def lm_scorer(lm: NGramLM) -> PerplexityScorer:
    return lambda tokens: perplexity(lm, tokens).value


@dataclass(frozen=True)
class DomainConfig:
    in_domain: PerplexityScorer
    non_domain: PerplexityScorer
    clip: float = DEFAULT_CLIP
    cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self) -> None:
        for name, value in (("clip", self.clip), ("cutoff", self.cutoff)):
            if not value > 0 or value != value or value == float("inf"):
                raise ConfigError(f"{name} threshold must be positive and finite, got {value}")


def clip(x: float, threshold: float) -> float:
    """min(x, threshold)."""
    return min(x, threshold)


def cutoff(x: float, threshold: float) -> float:
    """x if strictly above the threshold, else 0; equality zeroes."""
    return x if x > threshold else 0.0


def domain_raw(config: DomainConfig, tokens: Sequence[str]) -> float:
    """Unbounded perplexity ratio PPL_N / PPL_I of one target sentence."""
    return config.non_domain(tokens) / config.in_domain(tokens)


def domain_score(config: DomainConfig, pair: SentencePair, scheme: str = WHITESPACE) -> float:
    """Cutoff-then-clip score of the pair's target side; empty target -> 0."""
    tokens = tokenize(pair.target, scheme)
    if len(tokens) == 0:
        return 0.0
    return clip(cutoff(domain_raw(config, tokens.tokens), config.cutoff), config.clip)
