from __future__ import annotations

import pytest

from src.codec import EncodedPair, Vocabulary, encode_pair, serialize_pair
from src.data import Trajectory, generate_walkthrough
from src.engine import GameSpec, bundled_games, load_bundled
from src.goals import GoalStrategy
from src.model import Checkpoint, ModelConfig


@pytest.fixture(scope="session")
def gemhunt() -> GameSpec:
    return load_bundled("gemhunt")


@pytest.fixture(scope="session")
def merchant() -> GameSpec:
    return load_bundled("merchant")


@pytest.fixture(scope="session")
def vaultdoor() -> GameSpec:
    return load_bundled("vaultdoor")


@pytest.fixture(scope="session")
def games() -> list[GameSpec]:
    return bundled_games()


@pytest.fixture(scope="session")
def vocab(games: list[GameSpec]) -> Vocabulary:
    return Vocabulary.from_games(games)


@pytest.fixture(scope="session")
def gemhunt_walkthrough(gemhunt: GameSpec) -> Trajectory:
    return generate_walkthrough(gemhunt, gemhunt.meta.default_seed)


@pytest.fixture
def tiny_config(vocab: Vocabulary) -> ModelConfig:
    return ModelConfig(
        vocab_size=len(vocab),
        model_width=16,
        encoder_layers=1,
        decoder_layers=1,
        attention_heads=2,
        feedforward_width=32,
        max_input_tokens=256,
        max_output_tokens=96,
        init_seed=3,
    )


@pytest.fixture
def tiny_checkpoint(tiny_config: ModelConfig, vocab: Vocabulary) -> Checkpoint:
    return Checkpoint.initialize(tiny_config, vocab.version)


@pytest.fixture
def walkthrough_pairs(
    gemhunt_walkthrough: Trajectory, vocab: Vocabulary, tiny_config: ModelConfig
) -> list[EncodedPair]:
    return [
        encode_pair(
            serialize_pair(gemhunt_walkthrough, t, GoalStrategy.RTG, 50),
            vocab,
            tiny_config.max_input_tokens,
            tiny_config.max_output_tokens,
        )
        for t in range(len(gemhunt_walkthrough.steps))
    ]
