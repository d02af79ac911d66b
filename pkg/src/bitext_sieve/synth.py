"""Synthetic negative sampling for training the acceptability filter.

Each positive pair yields one corrupted negative via one of three
corruptions chosen uniformly: pair the source with a nearby target
(adjacent), drop a 30-70% suffix of one side (truncate), or shuffle
30-70% of one side's tokens (swap). Every record draws its randomness
from (seed, record id), so output is byte-identical regardless of how
records are partitioned over workers.
"""

from __future__ import annotations

import hashlib
import math
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace
from pathlib import Path

from .core import (
    SOURCE,
    TARGET,
    WHITESPACE,
    SentencePair,
    check_scheme,
    parallel_map,
    tokenize,
)
from .errors import ConfigError, DataError

TAG_POSITIVE = "none"
TAG_ADJACENT = "adjacent"
TAG_TRUNCATE = "truncate"
TAG_SWAP = "swap"
CORRUPTION_TAGS = (TAG_ADJACENT, TAG_TRUNCATE, TAG_SWAP)

_SWAP_ATTEMPTS = 16


@dataclass(frozen=True)
class CorruptionPolicy:
    window: int = 2
    truncate_range: tuple[float, float] = (0.3, 0.7)
    swap_range: tuple[float, float] = (0.3, 0.7)
    seed: int = 0
    scheme: str = WHITESPACE

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        for name, (lo, hi) in (
            ("truncate_range", self.truncate_range),
            ("swap_range", self.swap_range),
        ):
            if not (0.0 < lo <= hi < 1.0):
                raise ConfigError(f"{name} must satisfy 0 < lo <= hi < 1, got ({lo}, {hi})")
        check_scheme(self.scheme)


@dataclass(frozen=True)
class LabeledRecord:
    pair: SentencePair
    label: int  # 1 positive, 0 negative
    tag: str


@dataclass
class LabeledSet:
    records: list[LabeledRecord]

    def positives(self) -> list[LabeledRecord]:
        return [r for r in self.records if r.label == 1]

    def negatives(self) -> list[LabeledRecord]:
        return [r for r in self.records if r.label == 0]


def record_rng(seed: int, record_id: int) -> random.Random:
    """Independent stream per record; stable across runs and machines."""
    digest = hashlib.blake2b(f"{seed}:{record_id}".encode(), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def neg_adjacent(
    positives: Sequence[SentencePair], index: int, window: int, rng: random.Random
) -> SentencePair:
    """Pair source i with a target drawn from the +-window neighborhood."""
    pivot = positives[index]
    candidates = [
        j
        for j in range(max(0, index - window), min(len(positives), index + window + 1))
        if j != index and positives[j].target != pivot.target
    ]
    if not candidates:
        raise DataError(f"record {pivot.id}: no usable adjacent target within window {window}")
    return replace(pivot, target=positives[rng.choice(candidates)].target)


def _rebuild(pair: SentencePair, side: str, tokens: list[str], scheme: str) -> SentencePair:
    sep = " " if scheme == WHITESPACE else ""
    text = sep.join(tokens)
    return replace(pair, **{side: text})


def neg_truncate(
    pair: SentencePair, side: str, rng: random.Random, policy: CorruptionPolicy
) -> SentencePair | None:
    """Drop a suffix of ceil(f*n) tokens, keeping at least one; None if n < 2."""
    tokens = list(tokenize(pair.side(side), policy.scheme))
    n = len(tokens)
    if n < 2:
        return None
    lo, hi = policy.truncate_range
    removed = min(math.ceil(rng.uniform(lo, hi) * n), n - 1)
    return _rebuild(pair, side, tokens[: n - removed], policy.scheme)


def neg_swap(
    pair: SentencePair, side: str, rng: random.Random, policy: CorruptionPolicy
) -> SentencePair | None:
    """Permute ceil(f*n) token positions; None if no changed result is found."""
    tokens = list(tokenize(pair.side(side), policy.scheme))
    n = len(tokens)
    if n < 2:
        return None
    lo, hi = policy.swap_range
    m = min(math.ceil(rng.uniform(lo, hi) * n), n)
    positions = sorted(rng.sample(range(n), m))
    for _ in range(_SWAP_ATTEMPTS):
        chosen = [tokens[p] for p in positions]
        rng.shuffle(chosen)
        shuffled = list(tokens)
        for p, tok in zip(positions, chosen):
            shuffled[p] = tok
        if shuffled != tokens:
            return _rebuild(pair, side, shuffled, policy.scheme)
    return None


def _make_negative(
    positives: Sequence[SentencePair], index: int, policy: CorruptionPolicy
) -> LabeledRecord:
    pivot = positives[index]
    rng = record_rng(policy.seed, pivot.id)
    kind = CORRUPTION_TAGS[rng.randrange(3)]
    if kind != TAG_ADJACENT:
        side = SOURCE if rng.random() < 0.5 else TARGET
        op = neg_truncate if kind == TAG_TRUNCATE else neg_swap
        corrupted = op(pivot, side, rng, policy)
        if corrupted is not None:
            return LabeledRecord(corrupted, 0, kind)
        # degenerate side: fall back to the always-available corruption
    return LabeledRecord(
        neg_adjacent(positives, index, policy.window, rng), 0, TAG_ADJACENT
    )


def build_training_set(
    positives: Iterable[SentencePair],
    policy: CorruptionPolicy = CorruptionPolicy(),
    workers: int = 1,
) -> LabeledSet:
    """One negative per positive, interleaved as (positive, negative) pairs."""
    positives = list(positives)
    if len(positives) < 2:
        raise DataError(f"need at least 2 positives to corrupt, got {len(positives)}")
    negatives = parallel_map(
        lambda i: _make_negative(positives, i, policy), range(len(positives)), workers
    )
    records = []
    for pos, neg in zip(positives, negatives):
        records.append(LabeledRecord(pos, 1, TAG_POSITIVE))
        records.append(neg)
    return LabeledSet(records)


def labeled_line(record: LabeledRecord) -> str:
    from .core import pair_to_line

    return pair_to_line(record.pair)[:-1] + f"\t{record.label}\t{record.tag}\n"


def write_labeled(labeled: LabeledSet, path: str | Path) -> int:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for record in labeled.records:
            fh.write(labeled_line(record))
    return len(labeled.records)


def read_labeled(path: str | Path) -> LabeledSet:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"labeled file not found: {path}")
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh):
            line = raw[:-1] if raw.endswith("\n") else raw
            cols = line.split("\t")
            if len(cols) < 4 or len(cols) > 5:
                raise DataError(
                    f"{path}:{lineno + 1}: expected 4 or 5 columns in labeled TSV, got {len(cols)}"
                )
            meta = cols[2] if len(cols) == 5 else None
            label_col, tag = cols[-2], cols[-1]
            if label_col not in ("0", "1"):
                raise DataError(f"{path}:{lineno + 1}: label must be 0 or 1, got {label_col!r}")
            if tag not in (TAG_POSITIVE, *CORRUPTION_TAGS):
                raise DataError(f"{path}:{lineno + 1}: unknown tag {tag!r}")
            pair = SentencePair(id=lineno, source=cols[0], target=cols[1], meta=meta)
            records.append(LabeledRecord(pair, int(label_col), tag))
    return LabeledSet(records)
