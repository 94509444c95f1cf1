import numpy as np
import pytest

from treelm.grammar import load_pcfg
from treelm.models import ModelConfig, build_model
from treelm.vocab import Vocabulary, build_vocab

from fdcheck import finite_difference_grads, relative_errors  # noqa: F401


def builtin(name: str) -> str:
    from treelm.cli import builtin_path

    return str(builtin_path(name))


@pytest.fixture(scope="session")
def filler_gap_grammar():
    return load_pcfg(builtin("filler_gap.pcfg"))


@pytest.fixture(scope="session")
def npi_grammar():
    return load_pcfg(builtin("npi.pcfg"))


def plain_vocab(words) -> Vocabulary:
    """Vocabulary with exactly these words (no unk machinery), for toy models."""
    return Vocabulary(tuple(words), min_count=1)


@pytest.fixture
def ab_vocab():
    return plain_vocab(["a", "b"])


def tiny_model(architecture, words=("a", "b"), nts=("X",), seed=3, max_opens=2,
               word_dim=6, hidden_dim=6, num_layers=1, max_actions=40, dropout=0.0):
    cfg = ModelConfig(
        word_dim=word_dim,
        hidden_dim=hidden_dim,
        num_layers=num_layers,
        dropout=dropout,
        max_open_nts=max_opens,
        max_actions=max_actions,
    )
    return build_model(architecture, plain_vocab(words), list(nts), cfg, seed=seed)
