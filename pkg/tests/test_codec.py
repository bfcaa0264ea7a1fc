import random

import pytest

from src.codec import (
    EncodedPair,
    Vocabulary,
    encode_pair,
    export_pairs,
    goal_action_length,
    parse_output,
    serialize_context,
    serialize_observation,
    serialize_pair,
    serialize_target,
    truncate_context,
)
from src.codec.tokens import DELIMITER, GOAL_MARKER, PLACEHOLDER, UNK
from src.data import generate_perturbed
from src.engine import Observation, explore, reset
from src.errors import ConfigError, SequenceTooLongError, SplitIndexError, VocabularyNotFoundError
from src.goals import GoalStrategy, goal_sequence


def test_start_observation_template(gemhunt):
    _, observation = reset(gemhunt, 0)
    text = serialize_observation(observation)
    assert text.startswith("Actions: take key, go north </s></s> State: You wake")
    assert text.endswith("Inventory: You are empty-handed. </s></s>")


def test_empty_inventory_field_is_kept():
    observation = Observation(
        candidate_actions=["look"], message="Hi.", description="Room.", inventory=""
    )
    assert serialize_observation(observation).endswith("Inventory:  </s></s>")


def test_split_at_zero_is_first_observation(gemhunt_walkthrough):
    pair = serialize_pair(gemhunt_walkthrough, 0, GoalStrategy.RTG, 50)
    assert pair.input_text == serialize_observation(gemhunt_walkthrough.steps[0].observation)
    assert PLACEHOLDER not in pair.input_text


def test_placeholder_count(gemhunt_walkthrough):
    for t in range(len(gemhunt_walkthrough.steps)):
        pair = serialize_pair(gemhunt_walkthrough, t, GoalStrategy.RTG, 50)
        assert pair.input_text.split().count(PLACEHOLDER) == max(0, t - 1)


def test_output_carries_goal_action_and_next_observation(gemhunt_walkthrough):
    pair = serialize_pair(gemhunt_walkthrough, 1, GoalStrategy.RTG, 50)
    assert pair.output_text.startswith("GC: 80 </s></s> Action: go north </s></s> Actions:")
    assert pair.goal == 80


def test_last_split_has_no_next_observation(gemhunt_walkthrough):
    last = len(gemhunt_walkthrough.steps) - 1
    pair = serialize_pair(gemhunt_walkthrough, last, GoalStrategy.RTG, 50)
    assert pair.output_text == "GC: 20 </s></s> Action: put gem on altar </s></s>"


def test_split_out_of_range(gemhunt_walkthrough):
    with pytest.raises(SplitIndexError):
        serialize_pair(gemhunt_walkthrough, len(gemhunt_walkthrough.steps), GoalStrategy.RTG, 50)
    with pytest.raises(SplitIndexError):
        serialize_context(gemhunt_walkthrough.steps, -1, [])


def test_parse_output_examples():
    parsed = parse_output("GC: 80 </s></s> Action: take key </s></s> Actions: go north </s></s>")
    assert parsed.goal == 80
    assert parsed.action == "take key"
    assert parsed.observation == "Actions: go north </s></s>"

    assert parse_output("garbled ramble with no markers") == parse_output("")
    assert parse_output("garbled ramble with no markers").goal is None

    partial = parse_output("GC: 80 </s></s>")
    assert (partial.goal, partial.action, partial.observation) == (80, None, None)


def test_parse_inverts_render_on_random_trajectories(games):
    rng = random.Random(2024)
    for index in range(500):
        game = games[index % len(games)]
        trajectory = generate_perturbed(
            game, rng.randint(0, 4), rng.choice([0, 25, 50, 75, 95]), 6, random.Random(index)
        )
        goals = goal_sequence(trajectory.rewards, GoalStrategy.RTG, game.max_score)
        for t, item in enumerate(trajectory.steps):
            following = (
                trajectory.steps[t + 1].observation if t + 1 < len(trajectory.steps) else None
            )
            parsed = parse_output(serialize_target(goals[t], item.action, following))
            assert parsed.goal == goals[t]
            assert parsed.action == item.action
            expected = None if following is None else serialize_observation(following)
            assert parsed.observation == expected


def test_goal_tokens_encode_as_single_ids(vocab):
    ids = vocab.encode("GC: 43 </s></s>")
    assert ids == [vocab.id_of(GOAL_MARKER), vocab.goal_id(43), vocab.id_of(DELIMITER)]
    assert vocab.decode(ids) == "GC: 43 </s></s>"


def test_numbers_outside_goal_position_stay_words(vocab):
    ids = vocab.encode("Action: 7 </s></s>")
    assert ids[1] == vocab.unk_id
    assert vocab.goal_id(7) not in ids


def test_unknown_word(vocab):
    assert vocab.encode("xylophone") == [vocab.id_of(UNK)]


def test_every_reachable_observation_round_trips(games, vocab):
    for game in games:
        for observation in explore(game):
            text = serialize_observation(observation)
            ids = vocab.encode(text)
            assert vocab.unk_id not in ids, text
            assert vocab.decode(ids) == text


def test_vocab_save_load(vocab, tmp_path):
    path = tmp_path / "vocab.json"
    vocab.save(path)
    loaded = Vocabulary.load(path)
    assert loaded.tokens == vocab.tokens
    assert loaded.version == vocab.version


def test_vocab_load_missing_file(tmp_path):
    with pytest.raises(VocabularyNotFoundError, match="vocab.json"):
        Vocabulary.load(tmp_path / "vocab.json")


def test_vocab_load_rejects_tampered_file(vocab, tmp_path):
    path = tmp_path / "vocab.json"
    vocab.save(path)
    tampered = path.read_text(encoding="utf-8").replace(vocab.version, "0" * len(vocab.version))
    path.write_text(tampered, encoding="utf-8")
    with pytest.raises(ConfigError, match="version mismatch"):
        Vocabulary.load(path)

    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="unreadable"):
        Vocabulary.load(path)


def test_goal_action_length(vocab, gemhunt_walkthrough):
    pair = serialize_pair(gemhunt_walkthrough, 0, GoalStrategy.RTG, 50)
    ids = vocab.encode(pair.output_text)
    span = goal_action_length(ids, vocab)
    assert vocab.decode(ids[:span]) == "GC: 100 </s></s> Action: take key </s></s>"


def test_truncation_keeps_head_and_current_observation(vocab, games):
    trajectory = generate_perturbed(games[0], 0, 0, 40, random.Random(1))
    t = len(trajectory.steps) - 1
    goals = goal_sequence(trajectory.rewards, GoalStrategy.RTG, 50)
    ids = vocab.encode(serialize_context(trajectory.steps, t, goals))
    head = vocab.encode(serialize_observation(trajectory.steps[0].observation))
    tail = vocab.encode(serialize_observation(trajectory.steps[t].observation))
    limit = len(head) + len(tail) + 40
    truncated = truncate_context(ids, vocab, limit)
    assert len(truncated) <= limit
    assert truncated[: len(head)] == head
    assert truncated[-len(tail) :] == tail
    assert truncated[len(head)] == vocab.id_of(GOAL_MARKER)


def test_truncation_fails_when_nothing_fits(vocab, gemhunt_walkthrough):
    goals = goal_sequence(gemhunt_walkthrough.rewards, GoalStrategy.RTG, 50)
    ids = vocab.encode(serialize_context(gemhunt_walkthrough.steps, 0, goals))
    with pytest.raises(SequenceTooLongError):
        truncate_context(ids, vocab, 5)


def test_encode_pair(vocab, gemhunt_walkthrough, tmp_path):
    pair = serialize_pair(gemhunt_walkthrough, 3, GoalStrategy.FINS, 50)
    encoded = encode_pair(pair, vocab, 512, 128)
    assert isinstance(encoded, EncodedPair)
    assert encoded.has_observation
    assert encoded.output_ids[1] == vocab.goal_id(100)

    export_pairs([pair], tmp_path / "pairs.jsonl")
    assert (tmp_path / "pairs.jsonl").read_text().count("\n") == 1
