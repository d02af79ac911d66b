"""Backoff n-gram language models with ARPA serialization.

Two estimators: interpolated Kneser-Ney with a fixed absolute discount
(the default) and add-k smoothing (exact and convenient for small
hand-checkable models; it enumerates every observed context against the
full vocabulary, so keep it away from large corpora).

Probabilities are stored as base-10 logs, matching the ARPA text format,
so a save/load round trip preserves every value exactly. ``log_prob``
converts to natural log at the boundary because perplexity is defined
through exp.

Sentences are padded with one ``<s>`` (context only, never scored) and
one ``</s>`` (scored, counted in sentence length). Tokens outside the
vocabulary, and reserved symbols appearing as data, map to ``<unk>``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DataError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

KNESER_NEY = "kn"
ADD_K = "add-k"
SMOOTHINGS = (KNESER_NEY, ADD_K)

MAX_ORDER = 5

_LN10 = math.log(10.0)
# Conventional stand-in for "never predicted"; kept finite so arithmetic stays total.
_BOS_LOG10 = -99.0


@dataclass
class NGramLM:
    order: int
    vocab: frozenset[str]  # includes <s>, </s>, <unk>
    log10_probs: dict[tuple[str, ...], float]
    log10_backoffs: dict[tuple[str, ...], float]

    def predictable_vocab(self) -> list[str]:
        return sorted(self.vocab - {BOS})


@dataclass(frozen=True)
class Perplexity:
    value: float
    token_count: int


def _conditional_log10(lm: NGramLM, context: tuple[str, ...], word: str) -> float:
    """ARPA backoff rule: longest stored n-gram, else backoff weight + shorter."""
    acc = 0.0
    while True:
        logp = lm.log10_probs.get(context + (word,))
        if logp is not None:
            return acc + logp
        if not context:
            return acc + lm.log10_probs[(UNK,)]
        acc += lm.log10_backoffs.get(context, 0.0)
        context = context[1:]


def _sanitize(lm: NGramLM, tokens: Iterable[str]) -> list[str]:
    return [t if t in lm.vocab and t not in (BOS, EOS) else UNK for t in tokens]


def log_prob(lm: NGramLM, tokens: Sequence[str]) -> float:
    """Natural-log probability of a sentence, ``</s>`` term included."""
    history: tuple[str, ...] = (BOS,)
    total = 0.0
    for word in [*_sanitize(lm, tokens), EOS]:
        context = history[-(lm.order - 1):] if lm.order > 1 else ()
        total += _conditional_log10(lm, context, word)
        history += (word,)
    return total * _LN10


def perplexity(lm: NGramLM, tokens: Sequence[str]) -> Perplexity:
    """Word-normalized perplexity exp(-sum(ln P)/|x|); |x| counts ``</s>``."""
    tokens = list(tokens)
    if not tokens:
        raise DataError("empty sentence")
    count = len(tokens) + 1
    return Perplexity(math.exp(-log_prob(lm, tokens) / count), count)


def corpus_perplexity(lm: NGramLM, corpus: Iterable[Sequence[str]]) -> Perplexity:
    """Aggregate perplexity over many sentences (log mass pooled)."""
    total = 0.0
    count = 0
    for tokens in corpus:
        tokens = list(tokens)
        if not tokens:
            continue
        total += log_prob(lm, tokens)
        count += len(tokens) + 1
    if count == 0:
        raise DataError("empty corpus")
    return Perplexity(math.exp(-total / count), count)


def _collect_counts(sentences: list[list[str]], order: int) -> list[dict[tuple[str, ...], int]]:
    raw: list[dict[tuple[str, ...], int]] = [defaultdict(int) for _ in range(order + 1)]
    for sent in sentences:
        padded = [BOS, *sent, EOS]
        for n in range(1, order + 1):
            for i in range(len(padded) - n + 1):
                raw[n][tuple(padded[i : i + n])] += 1
    return raw


def _group_by_context(counts: dict[tuple[str, ...], int]):
    grouped: dict[tuple[str, ...], dict[str, int]] = defaultdict(dict)
    for gram, cnt in counts.items():
        grouped[gram[:-1]][gram[-1]] = cnt
    return grouped


def _train_kn(
    sentences: list[list[str]],
    order: int,
    vocab: frozenset[str],
    discount: float,
) -> tuple[dict, dict]:
    raw = _collect_counts(sentences, order)
    predictable = sorted(vocab - {BOS})
    uniform = 1.0 / len(predictable)

    # Adjusted counts: raw at the highest order; continuation counts below,
    # except <s>-initial n-grams which can never be extended to the left.
    adjusted: list[dict[tuple[str, ...], int]] = [dict() for _ in range(order + 1)]
    adjusted[order] = dict(raw[order])
    for n in range(order - 1, 0, -1):
        cont: dict[tuple[str, ...], set[str]] = defaultdict(set)
        for gram in raw[n + 1]:
            cont[gram[1:]].add(gram[0])
        level: dict[tuple[str, ...], int] = {}
        for gram, cnt in raw[n].items():
            level[gram] = cnt if gram[0] == BOS else len(cont.get(gram, ()))
        adjusted[n] = level

    probs: dict[tuple[str, ...], float] = {}
    backoffs: dict[tuple[str, ...], float] = {}

    def lower_prob(context: tuple[str, ...], word: str) -> float:
        """Evaluate the already-built lower levels with the backoff rule."""
        if not context and (word,) not in probs:
            return uniform
        acc = 1.0
        while True:
            p = probs.get(context + (word,))
            if p is not None:
                return acc * p
            if not context:
                return acc * probs[(word,)] if (word,) in probs else acc * uniform
            acc *= backoffs.get(context, 1.0)
            context = context[1:]

    # Unigram level: interpolate adjusted counts with the uniform floor so
    # every predictable type (<unk> included) gets positive mass.
    uni = adjusted[1]
    total = sum(cnt for (w,), cnt in uni.items() if w != BOS)
    if total == 0:
        raise DataError("degenerate corpus: no countable unigrams")
    kinds = sum(1 for (w,), cnt in uni.items() if w != BOS and cnt > 0)
    gamma1 = discount * kinds / total
    for word in predictable:
        cnt = uni.get((word,), 0)
        probs[(word,)] = max(cnt - discount, 0.0) / total + gamma1 * uniform

    for n in range(2, order + 1):
        grouped = _group_by_context(adjusted[n])
        for context in sorted(grouped):
            cont = grouped[context]
            ctx_total = sum(cont.values())
            gamma = discount * len(cont) / ctx_total
            for word, cnt in cont.items():
                probs[context + (word,)] = (
                    max(cnt - discount, 0.0) / ctx_total
                    + gamma * lower_prob(context[1:], word)
                )
            backoffs[context] = gamma

    return probs, backoffs


def _train_add_k(
    sentences: list[list[str]],
    order: int,
    vocab: frozenset[str],
    k: float,
) -> tuple[dict, dict]:
    if k <= 0:
        raise ConfigError(f"add-k smoothing needs k > 0, got {k}")
    raw = _collect_counts(sentences, order)
    predictable = sorted(vocab - {BOS})
    probs: dict[tuple[str, ...], float] = {}

    for n in range(1, order + 1):
        grouped = _group_by_context(raw[n])
        for context in sorted(grouped):
            if n == 1 and context == ():
                cont = {w: c for (w,), c in raw[1].items() if w != BOS}
            else:
                cont = grouped[context]
            ctx_total = sum(cont.values())
            denom = ctx_total + k * len(predictable)
            for word in predictable:
                probs[context + (word,)] = (cont.get(word, 0) + k) / denom
    return probs, {}


def train_lm(
    corpus: Iterable[Sequence[str]],
    order: int,
    smoothing: str = KNESER_NEY,
    *,
    k: float = 0.01,
    discount: float = 0.75,
    min_count: int = 1,
) -> NGramLM:
    """Estimate a backoff model from tokenized sentences.

    ``min_count`` > 1 maps rarer training tokens to ``<unk>`` (open
    vocabulary); the default keeps every observed type.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ConfigError(f"order must be in 1..{MAX_ORDER}, got {order}")
    if smoothing not in SMOOTHINGS:
        raise ConfigError(f"unknown smoothing {smoothing!r}, expected one of {SMOOTHINGS}")
    if not 0 < discount < 1:
        raise ConfigError(f"discount must be in (0, 1), got {discount}")
    if min_count < 1:
        raise ConfigError(f"min_count must be >= 1, got {min_count}")

    sentences = [
        [t if t not in (BOS, EOS, UNK) else UNK for t in sent] for sent in corpus
    ]
    if not sentences:
        raise DataError("empty corpus")

    if min_count > 1:
        freq: dict[str, int] = defaultdict(int)
        for sent in sentences:
            for tok in sent:
                freq[tok] += 1
        sentences = [
            [t if freq[t] >= min_count else UNK for t in sent] for sent in sentences
        ]

    vocab = frozenset(t for sent in sentences for t in sent) | {BOS, EOS, UNK}

    if smoothing == KNESER_NEY:
        probs, backoffs = _train_kn(sentences, order, vocab, discount)
    else:
        probs, backoffs = _train_add_k(sentences, order, vocab, k)

    log10_probs = {gram: math.log10(p) for gram, p in probs.items()}
    log10_probs[(BOS,)] = _BOS_LOG10
    log10_backoffs = {ctx: math.log10(b) for ctx, b in backoffs.items()}
    return NGramLM(order, vocab, log10_probs, log10_backoffs)


def _format_log(x: float) -> str:
    return repr(x)


def save_arpa(lm: NGramLM, path: str | Path) -> None:
    by_order: dict[int, list[tuple[tuple[str, ...], float]]] = defaultdict(list)
    for gram, logp in lm.log10_probs.items():
        by_order[len(gram)].append((gram, logp))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\\data\\\n")
        for n in range(1, lm.order + 1):
            fh.write(f"ngram {n}={len(by_order.get(n, ()))}\n")
        for n in range(1, lm.order + 1):
            fh.write(f"\n\\{n}-grams:\n")
            for gram, logp in sorted(by_order.get(n, ())):
                line = f"{_format_log(logp)}\t{' '.join(gram)}"
                bow = lm.log10_backoffs.get(gram)
                if bow is not None:
                    line += f"\t{_format_log(bow)}"
                fh.write(line + "\n")
        fh.write("\n\\end\\\n")


def load_arpa(path: str | Path) -> NGramLM:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"ARPA model not found: {path}")
    declared: dict[int, int] = {}
    probs: dict[tuple[str, ...], float] = {}
    backoffs: dict[tuple[str, ...], float] = {}
    section = 0
    with open(path, encoding="utf-8") as fh:
        lines = iter(enumerate(fh, start=1))
        for lineno, raw in lines:
            if raw.strip() == "\\data\\":
                break
        else:
            raise DataError(f"{path}: missing \\data\\ header")
        for lineno, raw in lines:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("ngram "):
                try:
                    n, cnt = line[len("ngram "):].split("=")
                    declared[int(n)] = int(cnt)
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: bad ngram count line") from exc
                continue
            if line == "\\end\\":
                break
            if line.startswith("\\") and line.endswith("-grams:"):
                try:
                    section = int(line[1:-len("-grams:")])
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: bad section header {line!r}") from exc
                continue
            if section == 0:
                raise DataError(f"{path}:{lineno}: entry before any n-gram section")
            cols = raw.rstrip("\n").split("\t")
            if len(cols) not in (2, 3):
                raise DataError(f"{path}:{lineno}: expected 2 or 3 tab-separated fields")
            gram = tuple(cols[1].split(" "))
            if len(gram) != section:
                raise DataError(
                    f"{path}:{lineno}: {len(gram)}-gram listed in \\{section}-grams: section"
                )
            try:
                probs[gram] = float(cols[0])
                if len(cols) == 3:
                    backoffs[gram] = float(cols[2])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad log value: {exc}") from exc
    if not declared:
        raise DataError(f"{path}: no ngram counts declared")
    order = max(declared)
    for n, cnt in declared.items():
        have = sum(1 for g in probs if len(g) == n)
        if have != cnt:
            raise DataError(f"{path}: declared {cnt} {n}-grams, found {have}")
    vocab = frozenset(g[0] for g in probs if len(g) == 1) | {BOS, EOS, UNK}
    return NGramLM(order, vocab, probs, backoffs)
