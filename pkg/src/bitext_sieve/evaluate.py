"""Precision/recall evaluation and corpus score statistics."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .core import (
    SCORE_COLUMNS,
    WHITESPACE,
    ScoreVector,
    SentencePair,
    check_scheme,
    tokenize,
)
from .errors import ConfigError, DataError

HISTOGRAM_BINS = 32


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float
    predicted: int
    true_positives: int


def precision_recall_at(
    scores: Sequence[float], labels: Sequence[int], threshold: float
) -> PRPoint:
    """Predict positive iff score >= threshold.

    No predictions at all counts as precision 1.0 by convention; a label
    vector without any positives is an error.
    """
    if len(scores) != len(labels):
        raise DataError(f"{len(scores)} scores vs {len(labels)} labels")
    positives = sum(1 for l in labels if l == 1)
    if positives == 0:
        raise DataError("labels contain no positives; recall is undefined")
    predicted = 0
    true_pos = 0
    for score, label in zip(scores, labels):
        if score >= threshold:
            predicted += 1
            if label == 1:
                true_pos += 1
    precision = true_pos / predicted if predicted else 1.0
    return PRPoint(threshold, precision, true_pos / positives, predicted, true_pos)


def pr_curve(
    scores: Sequence[float], labels: Sequence[int], grid: Sequence[float]
) -> list[PRPoint]:
    """One PR point per threshold; the grid must ascend strictly."""
    grid = list(grid)
    if not grid:
        raise ConfigError("threshold grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("threshold grid must be strictly ascending")
    return [precision_recall_at(scores, labels, t) for t in grid]


def parse_grid(text: str) -> list[float]:
    """Parse "start:stop:step" into an inclusive ascending grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc
    if step <= 0 or stop < start:
        raise ConfigError(f"bad grid {text!r}: need stop >= start and step > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


@dataclass(frozen=True)
class Histogram:
    edges: tuple[float, ...]  # len(bins) + 1
    counts: tuple[int, ...]

    @classmethod
    def build(cls, values: Sequence[float], lo: float, hi: float, bins: int = HISTOGRAM_BINS):
        if hi <= lo:
            hi = lo + 1.0
        width = (hi - lo) / bins
        counts = [0] * bins
        for v in values:
            idx = min(int((v - lo) / width), bins - 1)
            counts[max(idx, 0)] += 1
        edges = tuple(lo + i * width for i in range(bins + 1))
        return cls(edges, tuple(counts))


@dataclass
class StatsReport:
    records: int
    source_words: int
    target_words: int
    histograms: dict[str, Histogram]
    zero_fraction: dict[str, float]

    def to_doc(self) -> dict:
        return {
            "records": self.records,
            "source_words": self.source_words,
            "target_words": self.target_words,
            "histograms": {
                name: {"edges": list(h.edges), "counts": list(h.counts)}
                for name, h in self.histograms.items()
            },
            "zero_fraction": self.zero_fraction,
        }


def corpus_stats(
    rows: Iterable[tuple[SentencePair, ScoreVector]],
    source_scheme: str = WHITESPACE,
    target_scheme: str = WHITESPACE,
) -> StatsReport:
    """Histogram every score column and count words on both sides.

    An empty stream produces a zeroed report rather than an error.
    """
    check_scheme(source_scheme)
    check_scheme(target_scheme)
    columns: dict[str, list[float]] = {name: [] for name in SCORE_COLUMNS}
    source_words = 0
    target_words = 0
    records = 0
    for pair, scores in rows:
        records += 1
        source_words += len(tokenize(pair.source, source_scheme))
        target_words += len(tokenize(pair.target, target_scheme))
        columns["lang"].append(scores.language)
        columns["accept"].append(scores.acceptability)
        columns["domain"].append(scores.domain)
        columns["final"].append(scores.final)

    histograms = {}
    zero_fraction = {}
    for name, values in columns.items():
        hi = max(1.0, max(values, default=1.0))
        histograms[name] = Histogram.build(values, 0.0, hi)
        zero_fraction[name] = (
            sum(1 for v in values if v == 0.0) / records if records else 0.0
        )
    return StatsReport(records, source_words, target_words, histograms, zero_fraction)
