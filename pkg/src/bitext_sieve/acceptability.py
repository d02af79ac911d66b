"""Translation acceptability: is the pair a mutual translation?

The built-in scorer is logistic regression over cheap pair features
backed by EM-learned lexicons in both directions. Besides length and
lexical-coverage features it includes an order feature (rank agreement
of lexicon matches): coverage alone cannot see a reordered target, since
shuffling tokens preserves the bag of words.

An external scorer speaking the line protocol can replace the built-in
model entirely.
"""

from __future__ import annotations

import json
import logging
import math
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import WHITESPACE, SentencePair, check_scheme, tokenize
from .errors import ConfigError, DataError
from .lexicon import Lexicon, learn_lexicon, swap_pairs
from .protocol import PARALLELISM, ScorerClient
from .synth import LabeledSet

logger = logging.getLogger(__name__)

MODEL_VERSION = 1

KIND_BUILTIN = "builtin"
KIND_EXTERNAL = "external"

RATIO_FLOOR = 0.1
RATIO_CEIL = 10.0

FEATURE_NAMES = (
    "length_ratio",
    "log_length_ratio",
    "forward_coverage",
    "backward_coverage",
    "literal_overlap",
    "copy_ratio",
    "monotonicity",
)

_NUMBER_RE = re.compile(r"\d[\d.,]*")
_URL_RE = re.compile(r"https?://\S+|www\.\S+")
_EMAIL_RE = re.compile(r"[\w.+-]+@[\w-]+(?:\.[\w-]+)+")


@dataclass(frozen=True)
class FeatureVector:
    length_ratio: float
    log_length_ratio: float
    forward_coverage: float
    backward_coverage: float
    literal_overlap: float
    copy_ratio: float
    monotonicity: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES])


@dataclass
class AcceptabilityModel:
    kind: str
    source_scheme: str = WHITESPACE
    target_scheme: str = WHITESPACE
    # builtin fields
    weights: np.ndarray | None = None
    bias: float = 0.0
    feature_mean: np.ndarray | None = None
    feature_scale: np.ndarray | None = None
    forward_lexicon: Lexicon | None = None
    backward_lexicon: Lexicon | None = None
    lexicon_min_prob: float = 0.1
    # external fields
    command: str | None = None
    window: int = 256
    timeout: float = 30.0
    _client: ScorerClient | None = None

    def client(self) -> ScorerClient:
        if self.kind != KIND_EXTERNAL:
            raise ConfigError("only external models hold a scorer client")
        if self._client is None:
            if not self.command:
                raise ConfigError("external acceptability model needs a command")
            self._client = ScorerClient(
                self.command, PARALLELISM, window=self.window, timeout=self.timeout
            )
            self._client.start()
        return self._client

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
            self._client = None


@dataclass(frozen=True)
class AcceptTrainConfig:
    epochs: int = 400
    learning_rate: float = 0.5
    seed: int = 0
    em_iterations: int = 5
    lexicon_min_prob: float = 0.1
    source_scheme: str = WHITESPACE
    target_scheme: str = WHITESPACE

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.em_iterations < 0:
            raise ConfigError(f"em_iterations must be >= 0, got {self.em_iterations}")
        if not 0.0 < self.lexicon_min_prob < 1.0:
            raise ConfigError("lexicon_min_prob must be in (0, 1)")
        check_scheme(self.source_scheme)
        check_scheme(self.target_scheme)


def _literal_tokens(text: str) -> set[str]:
    found: set[str] = set()
    for rx in (_URL_RE, _EMAIL_RE, _NUMBER_RE):
        found.update(rx.findall(text))
    return found


def _jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    union = a | b
    return len(a & b) / len(union)


def _longest_common_substring(a: str, b: str) -> int:
    if not a or not b:
        return 0
    if len(b) < len(a):
        a, b = b, a
    prev = [0] * (len(a) + 1)
    best = 0
    for ch_b in b:
        cur = [0] * (len(a) + 1)
        for i, ch_a in enumerate(a, start=1):
            if ch_a == ch_b:
                cur[i] = prev[i - 1] + 1
                if cur[i] > best:
                    best = cur[i]
        prev = cur
    return best


def _coverage(src: Sequence[str], tgt: Sequence[str], lex: Lexicon, min_prob: float) -> float:
    if not src:
        return 0.0
    tgt_set = set(tgt)
    covered = 0
    for tok in src:
        row = lex.get(tok)
        if row and any(row.get(t, 0.0) >= min_prob for t in tgt_set):
            covered += 1
    return covered / len(src)


def _match_positions(
    src: Sequence[str], tgt: Sequence[str], lex: Lexicon, min_prob: float
) -> list[int]:
    """Best lexicon match position in tgt for each source token, in order."""
    matched: list[int] = []
    for tok in src:
        row = lex.get(tok)
        if not row:
            continue
        best_j = -1
        best_p = 0.0
        for j, t in enumerate(tgt):
            p = row.get(t, 0.0)
            if p > best_p:  # strict: ties keep the earliest position
                best_j, best_p = j, p
        if best_j >= 0 and best_p >= min_prob:
            matched.append(best_j)
    return matched


def _kendall_unit(positions: Sequence[int]) -> float:
    """Kendall tau of the match sequence mapped to [0, 1]; neutral 0.5 if < 2."""
    m = len(positions)
    if m < 2:
        return 0.5
    concordant = discordant = 0
    for i in range(m):
        for j in range(i + 1, m):
            if positions[j] > positions[i]:
                concordant += 1
            elif positions[j] < positions[i]:
                discordant += 1
    tau = (concordant - discordant) / (m * (m - 1) / 2)
    return (tau + 1.0) / 2.0


def extract_features(
    pair: SentencePair,
    forward_lexicon: Lexicon,
    backward_lexicon: Lexicon,
    source_scheme: str = WHITESPACE,
    target_scheme: str = WHITESPACE,
    min_prob: float = 0.1,
) -> FeatureVector:
    src = tokenize(pair.source, source_scheme).tokens
    tgt = tokenize(pair.target, target_scheme).tokens

    if not tgt:
        ratio = 1.0 if not src else RATIO_CEIL
    elif not src:
        ratio = RATIO_FLOOR
    else:
        ratio = min(max(len(src) / len(tgt), RATIO_FLOOR), RATIO_CEIL)

    return FeatureVector(
        length_ratio=ratio,
        log_length_ratio=math.log(ratio),
        forward_coverage=_coverage(src, tgt, forward_lexicon, min_prob),
        backward_coverage=_coverage(tgt, src, backward_lexicon, min_prob),
        literal_overlap=_jaccard(_literal_tokens(pair.source), _literal_tokens(pair.target)),
        copy_ratio=(
            _longest_common_substring(pair.source, pair.target)
            / max(len(pair.source), len(pair.target))
            if (pair.source or pair.target)
            else 0.0
        ),
        monotonicity=_kendall_unit(_match_positions(src, tgt, forward_lexicon, min_prob)),
    )


def _sigmoid(z: np.ndarray | float):
    return 1.0 / (1.0 + np.exp(-z))


def train_builtin(
    labeled: LabeledSet, config: AcceptTrainConfig = AcceptTrainConfig()
) -> AcceptabilityModel:
    """Fit lexicons on the positives, then logistic regression on features.

    Full-batch gradient descent with class rebalancing; deterministic for
    a fixed config. Unbalanced label counts only cost a warning.
    """
    positives = [r.pair for r in labeled.positives()]
    negatives = [r.pair for r in labeled.negatives()]
    if not positives or not negatives:
        raise DataError("training set needs both positive and negative records")
    if len(positives) != len(negatives):
        logger.warning(
            "unbalanced training set: %d positives vs %d negatives; rebalancing by class",
            len(positives),
            len(negatives),
        )

    fwd = learn_lexicon(
        positives, config.em_iterations, config.source_scheme, config.target_scheme
    )
    bwd = learn_lexicon(
        swap_pairs(positives), config.em_iterations, config.target_scheme, config.source_scheme
    )

    rows = []
    labels = []
    for record in labeled.records:
        rows.append(
            extract_features(
                record.pair, fwd, bwd, config.source_scheme, config.target_scheme,
                config.lexicon_min_prob,
            ).as_array()
        )
        labels.append(float(record.label))
    x = np.vstack(rows)
    y = np.array(labels)

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    xs = (x - mean) / scale

    n_pos = y.sum()
    n_neg = len(y) - n_pos
    sample_w = np.where(y == 1.0, len(y) / (2.0 * n_pos), len(y) / (2.0 * n_neg))

    weights = np.zeros(x.shape[1])
    bias = 0.0
    for _ in range(config.epochs):
        margin = xs @ weights + bias
        residual = sample_w * (_sigmoid(margin) - y)
        weights -= config.learning_rate * (xs.T @ residual) / len(y)
        bias -= config.learning_rate * residual.mean()

    return AcceptabilityModel(
        kind=KIND_BUILTIN,
        source_scheme=config.source_scheme,
        target_scheme=config.target_scheme,
        weights=weights,
        bias=float(bias),
        feature_mean=mean,
        feature_scale=scale,
        forward_lexicon=fwd,
        backward_lexicon=bwd,
        lexicon_min_prob=config.lexicon_min_prob,
    )


def acceptability_score(model: AcceptabilityModel, pair: SentencePair) -> float:
    """Pair score in [0, 1]; an empty side is 0 without consulting any model."""
    if not pair.source.strip() or not pair.target.strip():
        return 0.0
    if model.kind == KIND_BUILTIN:
        feats = extract_features(
            pair,
            model.forward_lexicon or {},
            model.backward_lexicon or {},
            model.source_scheme,
            model.target_scheme,
            model.lexicon_min_prob,
        ).as_array()
        scaled = (feats - model.feature_mean) / model.feature_scale
        return float(_sigmoid(scaled @ model.weights + model.bias))
    results = dict(model.client().score_batch([pair]))
    return results[pair.id]


def save_accept(model: AcceptabilityModel, path: str | Path) -> None:
    if model.kind != KIND_BUILTIN:
        raise ConfigError("only built-in models are persisted; external ones are a command")
    doc = {
        "version": MODEL_VERSION,
        "kind": model.kind,
        "source_scheme": model.source_scheme,
        "target_scheme": model.target_scheme,
        "weights": [float(w) for w in model.weights],
        "bias": model.bias,
        "feature_mean": [float(v) for v in model.feature_mean],
        "feature_scale": [float(v) for v in model.feature_scale],
        "lexicon_min_prob": model.lexicon_min_prob,
        "forward_lexicon": model.forward_lexicon,
        "backward_lexicon": model.backward_lexicon,
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_accept(path: str | Path) -> AcceptabilityModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"acceptability model not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if doc.get("version") != MODEL_VERSION or doc.get("kind") != KIND_BUILTIN:
        raise DataError(f"{path}: unsupported acceptability model")
    return AcceptabilityModel(
        kind=KIND_BUILTIN,
        source_scheme=doc["source_scheme"],
        target_scheme=doc["target_scheme"],
        weights=np.array(doc["weights"], dtype=np.float64),
        bias=float(doc["bias"]),
        feature_mean=np.array(doc["feature_mean"], dtype=np.float64),
        feature_scale=np.array(doc["feature_scale"], dtype=np.float64),
        forward_lexicon=doc["forward_lexicon"],
        backward_lexicon=doc["backward_lexicon"],
        lexicon_min_prob=float(doc["lexicon_min_prob"]),
    )


def external_model(
    command: str, *, window: int = 256, timeout: float = 30.0,
    source_scheme: str = WHITESPACE, target_scheme: str = WHITESPACE,
) -> AcceptabilityModel:
    return AcceptabilityModel(
        kind=KIND_EXTERNAL,
        command=command,
        window=window,
        timeout=timeout,
        source_scheme=source_scheme,
        target_scheme=target_scheme,
    )


MINE_PRODUCT = "product"
MINE_SEQUENTIAL = "sequential"


def mine_unsupervised_positives(
    scored: Sequence[tuple[SentencePair, float, float]],
    budget_words: int,
    side: str = "target",
    scheme: str = WHITESPACE,
    mode: str = MINE_PRODUCT,
    domain_threshold: float = 0.5,
) -> list[SentencePair]:
    """Pick likely-parallel pairs from (pair, alignment, domain) triples.

    Both score columns are min-max normalized over the batch. The default
    ranks by their product; "sequential" instead ranks by alignment alone
    after dropping pairs whose normalized domain score is below
    ``domain_threshold``. Greedy selection stops once ``budget_words`` is
    crossed, keeping the crossing pair.
    """
    from .pipeline import minmax_normalize  # local: pipeline imports this module

    if mode not in (MINE_PRODUCT, MINE_SEQUENTIAL):
        raise ConfigError(f"unknown mining mode {mode!r}")
    if budget_words < 1:
        raise ConfigError(f"budget_words must be >= 1, got {budget_words}")
    if not scored:
        raise DataError("nothing to mine: empty scored batch")
    align_norm = minmax_normalize([s for _, s, _ in scored])
    domain_norm = minmax_normalize([d for _, _, d in scored])
    if mode == MINE_PRODUCT:
        ranked = sorted(
            zip(scored, align_norm, domain_norm),
            key=lambda row: (-(row[1] * row[2]), row[0][0].id),
        )
        candidates = [entry[0][0] for entry in ranked]
    else:
        kept = [
            (pair, a)
            for (pair, _, _), a, d in zip(scored, align_norm, domain_norm)
            if d >= domain_threshold
        ]
        kept.sort(key=lambda row: (-row[1], row[0].id))
        candidates = [pair for pair, _ in kept]

    total_words = sum(len(tokenize(p.side(side), scheme)) for p in candidates)
    if total_words < budget_words:
        logger.warning(
            "word budget %d exceeds available %d words; keeping everything",
            budget_words,
            total_words,
        )
    picked: list[SentencePair] = []
    used = 0
    for pair in candidates:
        picked.append(pair)
        used += len(tokenize(pair.side(side), scheme))
        if used >= budget_words:
            break
    return picked
