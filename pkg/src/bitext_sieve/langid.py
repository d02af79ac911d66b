"""Trainable character n-gram language identifier and the pair-level filter.

The classifier is multinomial logistic regression over hashed character
n-grams (n = 1..n_max) drawn from whitespace-delimited tokens padded with
boundary markers. Feature counts are normalized by their total, so the
score of a text depends only on its n-gram frequency profile; repeating
the token sequence leaves the decision unchanged.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from zlib import crc32

import numpy as np

from .core import SentencePair
from .errors import ConfigError, DataError

UNKNOWN_LANGUAGE = "und"

MODEL_VERSION = 1

# Token boundary markers; control characters never survive tokenization.
_PAD_L = "\x02"
_PAD_R = "\x03"


@dataclass(frozen=True)
class Detection:
    language: str
    confidence: float


@dataclass
class LangIdModel:
    languages: tuple[str, ...]
    n_max: int
    buckets: int
    weights: np.ndarray  # (buckets, len(languages)), float64
    bias: np.ndarray  # (len(languages),)


@dataclass(frozen=True)
class LangIdConfig:
    n_max: int = 4
    buckets: int = 1 << 20
    epochs: int = 8
    learning_rate: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {self.n_max}")
        if self.buckets < 2 or self.buckets & (self.buckets - 1):
            raise ConfigError(f"buckets must be a power of two >= 2, got {self.buckets}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")


def _features(text: str, n_max: int, buckets: int) -> tuple[np.ndarray, np.ndarray]:
    """Hashed n-gram frequencies as (bucket indices, normalized values)."""
    mask = buckets - 1
    counts: Counter[int] = Counter()
    for tok in text.split():
        padded = _PAD_L + tok + _PAD_R
        size = len(padded)
        for n in range(1, n_max + 1):
            for i in range(size - n + 1):
                counts[crc32(padded[i : i + n].encode("utf-8")) & mask] += 1
    if not counts:
        return np.empty(0, dtype=np.int64), np.empty(0)
    idx = np.array(sorted(counts), dtype=np.int64)
    vals = np.array([counts[i] for i in idx], dtype=np.float64)
    return idx, vals / vals.sum()


def train_langid(
    samples: list[tuple[str, str]],
    config: LangIdConfig = LangIdConfig(),
) -> LangIdModel:
    """Fit the classifier on (text, language code) samples.

    Training is plain seeded SGD over shuffled samples and is deterministic
    for a fixed config.
    """
    languages = tuple(sorted({lang for _, lang in samples}))
    if len(languages) < 2:
        raise ConfigError(f"need samples from at least 2 languages, got {len(languages)}")
    lang_index = {lang: i for i, lang in enumerate(languages)}

    examples = []
    for text, lang in samples:
        idx, vals = _features(text, config.n_max, config.buckets)
        if idx.size:
            examples.append((idx, vals, lang_index[lang]))
    if not examples:
        raise DataError("no usable training samples (all empty)")

    weights = np.zeros((config.buckets, len(languages)))
    bias = np.zeros(len(languages))
    order = list(range(len(examples)))
    rng = random.Random(config.seed)
    lr = config.learning_rate
    for _ in range(config.epochs):
        rng.shuffle(order)
        for pos in order:
            idx, vals, label = examples[pos]
            logits = vals @ weights[idx] + bias
            logits -= logits.max()
            probs = np.exp(logits)
            probs /= probs.sum()
            probs[label] -= 1.0
            np.add.at(weights, idx, -lr * np.outer(vals, probs))
            bias -= lr * probs
    return LangIdModel(languages, config.n_max, config.buckets, weights, bias)


def predict_proba(model: LangIdModel, text: str) -> dict[str, float]:
    """Distribution over the model's languages; sums to 1 for any input."""
    idx, vals = _features(text, model.n_max, model.buckets)
    if idx.size:
        logits = vals @ model.weights[idx] + model.bias
    else:
        logits = model.bias.copy()
    logits -= logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    return {lang: float(p) for lang, p in zip(model.languages, probs)}


def detect(model: LangIdModel, text: str) -> Detection:
    """Argmax language with its probability; empty input maps to "und".

    Ties resolve to the lexicographically smallest code (languages are
    stored sorted and argmax takes the first maximum).
    """
    if not text.strip():
        return Detection(UNKNOWN_LANGUAGE, 0.0)
    probs = predict_proba(model, text)
    # languages are stored sorted, so the first maximum is the smallest code
    best = model.languages[0]
    for lang in model.languages[1:]:
        if probs[lang] > probs[best]:
            best = lang
    return Detection(best, probs[best])


def language_filter_score(
    model: LangIdModel, pair: SentencePair, source_language: str, target_language: str
) -> float:
    """1.0 iff both sides detect as the desired languages, else 0.0."""
    if detect(model, pair.source).language != source_language:
        return 0.0
    if detect(model, pair.target).language != target_language:
        return 0.0
    return 1.0


def save_langid(model: LangIdModel, path: str | Path) -> None:
    """Persist as versioned JSON with only the touched weight rows."""
    nonzero = np.flatnonzero(np.any(model.weights != 0.0, axis=1))
    doc = {
        "version": MODEL_VERSION,
        "languages": list(model.languages),
        "n_max": model.n_max,
        "buckets": model.buckets,
        "bias": [float(b) for b in model.bias],
        "rows": [[int(i), [float(w) for w in model.weights[i]]] for i in nonzero],
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_langid(path: str | Path) -> LangIdModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"language-id model not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if doc.get("version") != MODEL_VERSION:
        raise DataError(f"{path}: unsupported model version {doc.get('version')!r}")
    languages = tuple(doc["languages"])
    weights = np.zeros((doc["buckets"], len(languages)))
    for i, row in doc["rows"]:
        weights[i] = row
    return LangIdModel(
        languages=languages,
        n_max=doc["n_max"],
        buckets=doc["buckets"],
        weights=weights,
        bias=np.array(doc["bias"], dtype=np.float64),
    )
