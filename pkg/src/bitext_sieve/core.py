"""Domain types, tokenization and bitext TSV I/O shared by all filters.

A bitext file is UTF-8 text, one record per line:
``source<TAB>target[<TAB>meta]<LF>``, no header. Record ids are input
line ordinals, so a skipped line leaves a gap.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

WHITESPACE = "whitespace"
CHARACTER = "character"
SCHEMES = (WHITESPACE, CHARACTER)

SOURCE = "source"
TARGET = "target"
SIDES = (SOURCE, TARGET)

SCORE_COLUMNS = ("lang", "accept", "domain", "final")


@dataclass(frozen=True)
class SentencePair:
    """One aligned segment pair; ``id`` is unique within a corpus."""

    id: int
    source: str
    target: str
    meta: str | None = None

    def side(self, side: str) -> str:
        if side == SOURCE:
            return self.source
        if side == TARGET:
            return self.target
        raise ConfigError(f"unknown side {side!r}, expected one of {SIDES}")


@dataclass(frozen=True)
class TokenSeq:
    """A tokenized text together with the scheme that produced it."""

    tokens: tuple[str, ...]
    scheme: str = WHITESPACE

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def text(self) -> str:
        sep = " " if self.scheme == WHITESPACE else ""
        return sep.join(self.tokens)


@dataclass(frozen=True)
class ScoreVector:
    """Per-pair partial scores plus their combined product."""

    language: float
    acceptability: float
    domain: float
    final: float


def check_scheme(scheme: str) -> str:
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown token scheme {scheme!r}, expected one of {SCHEMES}")
    return scheme


def tokenize(text: str, scheme: str = WHITESPACE) -> TokenSeq:
    """Split ``text`` into tokens. No Unicode normalization is applied.

    ``whitespace`` splits on runs of whitespace; ``character`` yields each
    non-whitespace code point (for scripts written without spaces).
    """
    check_scheme(scheme)
    if scheme == WHITESPACE:
        toks = tuple(text.split())
    else:
        toks = tuple(ch for ch in text if not ch.isspace())
    return TokenSeq(toks, scheme)


@dataclass
class Diagnostics:
    """Counts of records rejected during ingestion."""

    skipped: int = 0
    messages: list[str] = field(default_factory=list)

    def record(self, message: str) -> None:
        self.skipped += 1
        self.messages.append(message)
        logger.warning("%s", message)


def _parse_line(line: str, path: str, lineno: int) -> SentencePair:
    cols = line.split("\t")
    if len(cols) < 2:
        raise DataError(f"{path}:{lineno + 1}: expected at least 2 tab-separated columns, got {len(cols)}")
    if len(cols) > 3:
        # A tab inside a field is indistinguishable from extra columns; reject.
        raise DataError(f"{path}:{lineno + 1}: expected at most 3 tab-separated columns, got {len(cols)}")
    meta = cols[2] if len(cols) == 3 else None
    return SentencePair(id=lineno, source=cols[0], target=cols[1], meta=meta)


def read_bitext(
    path: str | Path,
    on_error: str = "skip",
    diagnostics: Diagnostics | None = None,
) -> Iterator[SentencePair]:
    """Stream sentence pairs from a bitext TSV file.

    Malformed lines are skipped with a diagnostic or abort the read,
    depending on ``on_error`` ("skip" or "abort"). Bytes that are not
    valid UTF-8 always abort, naming the offending byte offset.
    """
    if on_error not in ("skip", "abort"):
        raise ConfigError(f"on_error must be 'skip' or 'abort', got {on_error!r}")
    path = Path(path)
    if not path.is_file():
        raise DataError(f"bitext file not found: {path}")
    offset = 0
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh):
            stripped = raw[:-1] if raw.endswith(b"\n") else raw
            try:
                line = stripped.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DataError(
                    f"{path}: invalid UTF-8 at byte {offset + exc.start}"
                ) from exc
            try:
                yield _parse_line(line, str(path), lineno)
            except DataError as exc:
                if on_error == "abort":
                    raise
                if diagnostics is not None:
                    diagnostics.record(str(exc))
                else:
                    logger.warning("%s (skipped)", exc)
            offset += len(raw)


def pair_to_line(pair: SentencePair) -> str:
    cols = [pair.source, pair.target]
    if pair.meta is not None:
        cols.append(pair.meta)
    for col in cols:
        if "\t" in col or "\n" in col:
            raise DataError(f"record {pair.id}: fields must not contain tab or newline")
    return "\t".join(cols) + "\n"


def write_bitext(pairs: Iterable[SentencePair], path: str | Path) -> int:
    """Write pairs as bitext TSV. Returns the number of records written."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for pair in pairs:
            fh.write(pair_to_line(pair))
            n += 1
    return n


def count_words(pairs: Iterable[SentencePair], side: str, scheme: str = WHITESPACE) -> int:
    """Total token count over one side of a corpus under ``scheme``."""
    if side not in SIDES:
        raise ConfigError(f"unknown side {side!r}, expected one of {SIDES}")
    check_scheme(scheme)
    return sum(len(tokenize(pair.side(side), scheme)) for pair in pairs)


def format_score(x: float) -> str:
    return f"{x:.6f}"


def scored_line(pair: SentencePair, scores: ScoreVector) -> str:
    base = pair_to_line(pair)[:-1]
    cols = [
        format_score(scores.language),
        format_score(scores.acceptability),
        format_score(scores.domain),
        format_score(scores.final),
    ]
    return base + "\t" + "\t".join(cols) + "\n"


def write_scored(rows: Iterable[tuple[SentencePair, ScoreVector]], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for pair, scores in rows:
            fh.write(scored_line(pair, scores))
            n += 1
    return n


def read_scored(path: str | Path) -> Iterator[tuple[SentencePair, ScoreVector]]:
    """Stream (pair, scores) rows from a scored TSV file.

    The last four columns are lang/accept/domain/final; whatever precedes
    them is the original record (source, target, optional meta).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"scored file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh):
            line = raw[:-1] if raw.endswith("\n") else raw
            cols = line.split("\t")
            if len(cols) < 6 or len(cols) > 7:
                raise DataError(
                    f"{path}:{lineno + 1}: expected 6 or 7 columns in scored TSV, got {len(cols)}"
                )
            meta = cols[2] if len(cols) == 7 else None
            try:
                lang, accept, domain, final = (float(c) for c in cols[-4:])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno + 1}: bad score column: {exc}") from exc
            pair = SentencePair(id=lineno, source=cols[0], target=cols[1], meta=meta)
            yield pair, ScoreVector(lang, accept, domain, final)


def materialize(pairs: Iterable[SentencePair]) -> list[SentencePair]:
    out = list(pairs)
    if not out:
        raise DataError("corpus is empty")
    return out


def parallel_map(fn, items: Sequence, workers: int) -> list:
    """Apply ``fn`` to every item, preserving order.

    The result is independent of ``workers``; the pool only changes how
    work is partitioned.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (workers * 4))))
