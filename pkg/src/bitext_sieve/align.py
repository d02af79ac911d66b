"""Sentence alignment scoring: length statistics plus dictionary coverage.

The length component follows Gale & Church: the character-length pair
(len_s, len_t) is scored by the log likelihood of its normalized length
difference under a Gaussian with per-character mean ``length_mean`` and
variance ``length_variance``. Document alignment is a minimum-cost
monotone DP over the classic bead inventory.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .core import WHITESPACE, SentencePair, check_scheme, tokenize
from .errors import ConfigError, DataError

# Bead priors from Gale & Church (1993), negated logs as penalties.
BEAD_TYPES = ((1, 1), (1, 0), (0, 1), (2, 1), (1, 2), (2, 2))
_BEAD_PRIORS = {
    (1, 1): 0.89,
    (1, 0): 0.0099,
    (0, 1): 0.0099,
    (2, 1): 0.0445,
    (1, 2): 0.0445,
    (2, 2): 0.011,
}
DEFAULT_BEAD_PENALTIES = {bead: -math.log(p) for bead, p in _BEAD_PRIORS.items()}

# Score assigned when the length likelihood is undefined (both sides empty).
EMPTY_PAIR_SCORE = -1e9

_LN2 = math.log(2.0)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AlignmentParams:
    length_mean: float = 1.0
    length_variance: float = 6.8
    bead_penalties: Mapping[tuple[int, int], float] = field(
        default_factory=lambda: dict(DEFAULT_BEAD_PENALTIES)
    )
    dictionary: Mapping[str, frozenset[str]] | None = None
    coverage_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.length_mean <= 0 or self.length_variance <= 0:
            raise ConfigError("length_mean and length_variance must be positive")
        missing = [b for b in BEAD_TYPES if b not in self.bead_penalties]
        if missing:
            raise ConfigError(f"bead_penalties missing entries for {missing}")
        one_one = self.bead_penalties[(1, 1)]
        if any(self.bead_penalties[b] < one_one for b in BEAD_TYPES):
            raise ConfigError("the 1-1 bead must carry the minimum penalty")


def _norm_log_sf(x: float) -> float:
    """log(1 - Phi(x)) for x >= 0, stable far into the tail."""
    tail = math.erfc(x / _SQRT2)
    if tail > 0.0:
        return math.log(0.5 * tail)
    return -0.5 * x * x - math.log(x) - 0.5 * math.log(2.0 * math.pi)


def length_log_likelihood(len_s: int, len_t: int, params: AlignmentParams) -> float:
    """Gale-Church match likelihood of a character-length pair; <= 0."""
    if len_s < 0 or len_t < 0:
        raise ConfigError("lengths must be non-negative")
    mean = (len_s + len_t / params.length_mean) / 2.0
    if mean <= 0.0:
        return EMPTY_PAIR_SCORE
    delta = (len_t - len_s * params.length_mean) / math.sqrt(mean * params.length_variance)
    return _LN2 + _norm_log_sf(abs(delta))


def dictionary_coverage(
    pair: SentencePair,
    dictionary: Mapping[str, frozenset[str]],
    scheme: str = WHITESPACE,
) -> float:
    """Fraction of source tokens with a listed translation in the target."""
    check_scheme(scheme)
    src = tokenize(pair.source, scheme).tokens
    if not src:
        return 0.0
    tgt = set(tokenize(pair.target, scheme).tokens)
    covered = sum(1 for tok in src if not tgt.isdisjoint(dictionary.get(tok, ())))
    return covered / len(src)


def pair_alignment_score(
    pair: SentencePair, params: AlignmentParams = AlignmentParams(), scheme: str = WHITESPACE
) -> float:
    """Length likelihood minus a weighted dictionary-coverage penalty.

    Without a dictionary the score is the length component alone. Both
    sides empty yields the sentinel EMPTY_PAIR_SCORE.
    """
    score = length_log_likelihood(len(pair.source), len(pair.target), params)
    if params.dictionary is not None and score > EMPTY_PAIR_SCORE:
        coverage = dictionary_coverage(pair, params.dictionary, scheme)
        score -= params.coverage_weight * (1.0 - coverage)
    return score


@dataclass(frozen=True)
class Bead:
    source_indices: tuple[int, ...]
    target_indices: tuple[int, ...]

    @property
    def kind(self) -> tuple[int, int]:
        return (len(self.source_indices), len(self.target_indices))


def _bead_cost(
    src_lens: Sequence[int], tgt_lens: Sequence[int], i: int, j: int,
    bead: tuple[int, int], params: AlignmentParams,
) -> float:
    ls = sum(src_lens[i - bead[0] : i])
    lt = sum(tgt_lens[j - bead[1] : j])
    return params.bead_penalties[bead] - length_log_likelihood(ls, lt, params)


def align_doc(
    source_sentences: Sequence[str],
    target_sentences: Sequence[str],
    params: AlignmentParams = AlignmentParams(),
) -> list[Bead]:
    """Minimum-cost monotone bead sequence covering both documents.

    Ties prefer the 1-1 bead, then the bead consuming fewer source
    sentences, via the fixed candidate order and strict improvement.
    """
    if not source_sentences and not target_sentences:
        raise DataError("cannot align two empty documents")
    src_lens = [len(s) for s in source_sentences]
    tgt_lens = [len(t) for t in target_sentences]
    rows, cols = len(src_lens) + 1, len(tgt_lens) + 1
    inf = float("inf")
    cost = [[inf] * cols for _ in range(rows)]
    back: list[list[tuple[int, int] | None]] = [[None] * cols for _ in range(rows)]
    cost[0][0] = 0.0
    for i in range(rows):
        for j in range(cols):
            if i == 0 and j == 0:
                continue
            for bead in BEAD_TYPES:
                pi, pj = i - bead[0], j - bead[1]
                if pi < 0 or pj < 0 or cost[pi][pj] == inf:
                    continue
                cand = cost[pi][pj] + _bead_cost(src_lens, tgt_lens, i, j, bead, params)
                if cand < cost[i][j]:
                    cost[i][j] = cand
                    back[i][j] = bead
    if cost[-1][-1] == inf:
        raise DataError("no bead sequence covers both documents")
    beads: list[Bead] = []
    i, j = len(src_lens), len(tgt_lens)
    while i or j:
        bead = back[i][j]
        assert bead is not None
        beads.append(
            Bead(tuple(range(i - bead[0], i)), tuple(range(j - bead[1], j)))
        )
        i -= bead[0]
        j -= bead[1]
    beads.reverse()
    return beads


def alignment_cost(
    source_sentences: Sequence[str],
    target_sentences: Sequence[str],
    params: AlignmentParams = AlignmentParams(),
) -> float:
    """Total cost of the optimal bead sequence (what align_doc minimizes)."""
    src_lens = [len(s) for s in source_sentences]
    tgt_lens = [len(t) for t in target_sentences]
    total = 0.0
    for bead in align_doc(source_sentences, target_sentences, params):
        ls = sum(src_lens[k] for k in bead.source_indices)
        lt = sum(tgt_lens[k] for k in bead.target_indices)
        total += params.bead_penalties[bead.kind] - length_log_likelihood(ls, lt, params)
    return total


def read_dictionary(path: str | Path) -> dict[str, frozenset[str]]:
    """Load a two-column TSV of source token -> target token entries."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dictionary not found: {path}")
    entries: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh):
            line = raw.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise DataError(f"{path}:{lineno + 1}: expected 2 columns, got {len(cols)}")
            entries.setdefault(cols[0], set()).add(cols[1])
    return {src: frozenset(tgts) for src, tgts in entries.items()}
