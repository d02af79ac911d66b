"""Scoring pipeline: compose the three filters and select subsets.

Scores flow through two passes. Pass one computes raw partial scores per
pair and the per-filter min/max over the corpus; pass two rescales the
domain score into [0, 1] with those statistics and writes the output.
Every partial is quantized to the output precision (six fractional
digits) before composition, so the final column is bit-exactly the
product of the serialized partials and an external scorer echoing the
serialized values reproduces the run byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .acceptability import KIND_EXTERNAL, AcceptabilityModel, acceptability_score
from .core import (
    SIDES,
    WHITESPACE,
    ScoreVector,
    SentencePair,
    check_scheme,
    parallel_map,
    read_bitext,
    tokenize,
    write_scored,
)
from .domain import DomainConfig, domain_score
from .errors import ConfigError, DataError
from .langid import LangIdModel, language_filter_score
from .protocol import PARALLELISM, PERPLEXITY, score_pairs_external

logger = logging.getLogger(__name__)

FILTER_NAMES = ("lang", "accept", "domain")

STATS_SUFFIX = ".stats.json"


def quantize(x: float) -> float:
    """Round to the six fractional digits that survive serialization."""
    return float(f"{x:.6f}")


def minmax_normalize(values: Sequence[float]) -> list[float]:
    """(v - min) / (max - min); a degenerate range maps everything to 1."""
    if len(values) == 0:
        raise DataError("cannot normalize an empty list")
    lo = min(values)
    hi = max(values)
    if hi == lo:
        return [1.0] * len(values)
    span = hi - lo
    return [(v - lo) / span for v in values]


def combine(language: float, acceptability: float, domain: float) -> float:
    """Product of partial scores, each already in [0, 1]."""
    for name, value in zip(FILTER_NAMES, (language, acceptability, domain)):
        if not 0.0 <= value <= 1.0 or math.isnan(value):
            raise ConfigError(f"{name} partial score out of [0, 1]: {value!r}")
    return language * acceptability * domain


@dataclass
class NormalizationStats:
    corpus: str
    records: int
    minima: dict[str, float]
    maxima: dict[str, float]

    def normalize_domain(self, value: float) -> float:
        lo = self.minima["domain"]
        hi = self.maxima["domain"]
        if hi == lo:
            return 1.0
        return (value - lo) / (hi - lo)

    def to_json(self) -> str:
        doc = {
            "corpus": self.corpus,
            "records": self.records,
            "filters": {
                name: {"min": self.minima[name], "max": self.maxima[name]}
                for name in FILTER_NAMES
            },
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "NormalizationStats":
        doc = json.loads(text)
        return cls(
            corpus=doc["corpus"],
            records=int(doc["records"]),
            minima={k: float(v["min"]) for k, v in doc["filters"].items()},
            maxima={k: float(v["max"]) for k, v in doc["filters"].items()},
        )


def compute_stats(
    corpus_id: str, partials: Sequence[tuple[float, float, float]]
) -> NormalizationStats:
    if not partials:
        raise DataError("no records survived ingestion; nothing to score")
    minima = {}
    maxima = {}
    for pos, name in enumerate(FILTER_NAMES):
        column = [row[pos] for row in partials]
        minima[name] = min(column)
        maxima[name] = max(column)
    return NormalizationStats(corpus_id, len(partials), minima, maxima)


def load_stats(path: str | Path) -> NormalizationStats:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"stats sidecar not found: {path}")
    return NormalizationStats.from_json(path.read_text(encoding="utf-8"))


@dataclass
class ScoringConfig:
    langid_model: LangIdModel | None = None
    source_language: str | None = None
    target_language: str | None = None
    accept_model: AcceptabilityModel | None = None
    domain: DomainConfig | None = None
    domain_command: str | None = None  # external in-domain perplexity scorer
    source_scheme: str = WHITESPACE
    target_scheme: str = WHITESPACE
    workers: int = 1

    def __post_init__(self) -> None:
        check_scheme(self.source_scheme)
        check_scheme(self.target_scheme)
        if self.langid_model is not None and not (
            self.source_language and self.target_language
        ):
            raise ConfigError("language filtering needs desired source and target languages")
        if self.langid_model is None and self.accept_model is None and self.domain is None:
            raise ConfigError("at least one filter must be configured")


def corpus_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _domain_partials(config: ScoringConfig, pairs: Sequence[SentencePair]) -> list[float]:
    from .domain import clip, cutoff  # narrow import to keep call sites obvious

    dom = config.domain
    if dom is None:
        return [1.0] * len(pairs)
    token_rows = [tokenize(p.target, config.target_scheme).tokens for p in pairs]
    if config.domain_command:
        in_ppl = score_pairs_external(config.domain_command, PERPLEXITY, pairs)
    else:
        in_ppl = parallel_map(
            lambda toks: dom.in_domain(toks) if toks else math.inf,
            token_rows,
            config.workers,
        )
    scores = []
    for toks, ppl_i in zip(token_rows, in_ppl):
        if not toks:
            scores.append(0.0)
            continue
        raw = dom.non_domain(toks) / ppl_i
        scores.append(clip(cutoff(raw, dom.cutoff), dom.clip))
    return scores


def score_pairs(
    config: ScoringConfig, pairs: Sequence[SentencePair]
) -> list[tuple[float, float, float]]:
    """Quantized (lang, accept, domain) partials for a pair batch."""
    if config.langid_model is not None:
        lang = parallel_map(
            lambda p: language_filter_score(
                config.langid_model, p, config.source_language, config.target_language
            ),
            pairs,
            config.workers,
        )
    else:
        lang = [1.0] * len(pairs)

    accept_model = config.accept_model
    if accept_model is None:
        accept = [1.0] * len(pairs)
    elif accept_model.kind == KIND_EXTERNAL:
        # the empty-side zero rule applies before any model, external included
        nonempty = [p for p in pairs if p.source.strip() and p.target.strip()]
        by_id = dict(zip((p.id for p in nonempty),
                         score_pairs_external(accept_model.command, PARALLELISM, nonempty,
                                              window=accept_model.window,
                                              timeout=accept_model.timeout)))
        accept = [by_id.get(p.id, 0.0) for p in pairs]
    else:
        accept = parallel_map(
            lambda p: acceptability_score(accept_model, p), pairs, config.workers
        )

    domain = _domain_partials(config, pairs)

    return [
        (quantize(l), quantize(a), quantize(d))
        for l, a, d in zip(lang, accept, domain)
    ]


def run_scoring(
    in_path: str | Path,
    out_path: str | Path,
    config: ScoringConfig,
) -> NormalizationStats:
    """Score a bitext file into a scored TSV plus its stats sidecar."""
    in_path = Path(in_path)
    out_path = Path(out_path)
    pairs = list(read_bitext(in_path))
    if not pairs:
        raise DataError(f"{in_path}: no usable records")
    corpus_id = f"{in_path.name}:sha256:{corpus_digest(in_path)[:16]}"

    partials = score_pairs(config, pairs)
    stats = compute_stats(corpus_id, partials)

    def rows() -> Iterable[tuple[SentencePair, ScoreVector]]:
        for pair, (lang, accept, dom) in zip(pairs, partials):
            final = combine(lang, accept, stats.normalize_domain(dom))
            yield pair, ScoreVector(lang, accept, dom, final)

    write_scored(rows(), out_path)
    stats_path = Path(str(out_path) + STATS_SUFFIX)
    stats_path.write_text(stats.to_json(), encoding="utf-8")
    return stats


def select_by_budget(
    rows: Iterable[tuple[SentencePair, float]],
    budget_words: int,
    side: str = "target",
    scheme: str = WHITESPACE,
) -> list[tuple[SentencePair, float]]:
    """Greedy best-first subset until the word budget is crossed.

    Rows are ranked by score descending, ties by smaller id. The pair that
    crosses the budget is included. A budget larger than the corpus keeps
    everything, with a warning.
    """
    if budget_words < 1:
        raise ConfigError(f"budget must be >= 1 words, got {budget_words}")
    if side not in SIDES:
        raise ConfigError(f"unknown side {side!r}, expected one of {SIDES}")
    check_scheme(scheme)
    ranked = sorted(rows, key=lambda row: (-row[1], row[0].id))
    picked = []
    used = 0
    for pair, score in ranked:
        picked.append((pair, score))
        used += len(tokenize(pair.side(side), scheme))
        if used >= budget_words:
            break
    else:
        if ranked:
            logger.warning(
                "word budget %d exceeds the %d available words; keeping all %d pairs",
                budget_words, used, len(ranked),
            )
    return picked


def select_top_percent(
    rows: Iterable[tuple[SentencePair, float]], percent: float
) -> list[tuple[SentencePair, float]]:
    """Highest-scoring ceil(percent/100 * N) rows, ties by smaller id."""
    if not 0.0 < percent <= 100.0:
        raise ConfigError(f"percent must be in (0, 100], got {percent}")
    ranked = sorted(rows, key=lambda row: (-row[1], row[0].id))
    keep = math.ceil(percent / 100.0 * len(ranked))
    return ranked[:keep]
