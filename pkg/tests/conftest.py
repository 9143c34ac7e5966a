import json
from pathlib import Path

import numpy as np
import pytest

from alignrag.encoder import EncoderParams, init_encoder_params
from alignrag.vocab import Vocabulary

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def metric_cases() -> dict:
    return json.loads((FIXTURES / "metric_cases.json").read_text())


@pytest.fixture(scope="session")
def hotpot_mini_path() -> Path:
    return FIXTURES / "hotpot_mini.json"


@pytest.fixture
def tiny_vocab() -> Vocabulary:
    return Vocabulary(["alpha", "bravo", "charlie", "delta", "echo"], hash_buckets=8)


@pytest.fixture
def tiny_encoder(tiny_vocab) -> EncoderParams:
    return init_encoder_params(tiny_vocab.size, dim=6, seed=42)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
