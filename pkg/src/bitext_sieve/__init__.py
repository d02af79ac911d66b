"""bitext-sieve: score noisy parallel corpora and pick training subsets.

Three per-pair filters (language identity, translation acceptability,
domain fit) produce partial scores in [0, 1]; their product ranks pairs
for selection under a word budget.
"""

__version__ = "0.1.0"

from .core import ScoreVector, SentencePair, TokenSeq, count_words, read_bitext, tokenize
from .errors import ConfigError, DataError, ProtocolError, SieveError

__all__ = [
    "__version__",
    "ConfigError",
    "DataError",
    "ProtocolError",
    "ScoreVector",
    "SentencePair",
    "SieveError",
    "TokenSeq",
    "count_words",
    "read_bitext",
    "tokenize",
]
