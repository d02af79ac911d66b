import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
sys.path.insert(0, str(TESTS_DIR))

import corpusgen  # noqa: E402

from bitext_sieve.acceptability import AcceptTrainConfig, train_builtin  # noqa: E402
from bitext_sieve.langid import LangIdConfig, train_langid  # noqa: E402
from bitext_sieve.ngram_lm import train_lm  # noqa: E402
from bitext_sieve.synth import CorruptionPolicy, build_training_set  # noqa: E402

SCORER = [sys.executable, str(TESTS_DIR / "external_scorer.py")]


def scorer_cmd(mode: str) -> list[str]:
    return SCORER + [mode]


@pytest.fixture(scope="session")
def toy_pairs():
    return corpusgen.parallel_corpus(800, seed=101)


@pytest.fixture(scope="session")
def labeled_set(toy_pairs):
    return build_training_set(toy_pairs, CorruptionPolicy(seed=102))


@pytest.fixture(scope="session")
def accept_model(labeled_set):
    return train_builtin(labeled_set, AcceptTrainConfig(seed=103))


@pytest.fixture(scope="session")
def langid_model():
    return train_langid(corpusgen.langid_corpus(150, seed=104), LangIdConfig(epochs=4, seed=105))


@pytest.fixture(scope="session")
def domain_lm():
    return train_lm(corpusgen.domain_corpus(1200, seed=106), 3, "kn")


@pytest.fixture(scope="session")
def garbage_lm():
    return train_lm(corpusgen.garbage_corpus(1200, seed=107), 3, "kn")
