import random

import pytest

from src.data import (
    WALKTHROUGH_FRACTION,
    TrajectoryStore,
    dataset_stats,
    generate_dataset,
    generate_perturbed,
    generate_walkthrough,
    walkthrough_prefix_length,
    write_stats,
)
from src.engine import reset, step
from src.errors import ConfigError, DatasetNotFoundError

FULL_FRACTIONS = list(range(0, 100, 5))


def test_prefix_length_floors():
    assert walkthrough_prefix_length(95, 8) == 7
    assert walkthrough_prefix_length(0, 8) == 0
    assert walkthrough_prefix_length(50, 9) == 4


def test_high_fraction_follows_walkthrough_prefix(gemhunt):
    trajectory = generate_perturbed(gemhunt, 0, 95, 5, random.Random(0))
    assert trajectory.actions[:7] == gemhunt.walkthrough[:7]
    assert trajectory.walkthrough_fraction == 95


def test_zero_fraction_draws_from_candidates(vaultdoor):
    trajectory = generate_perturbed(vaultdoor, 0, 0, 20, random.Random(3))
    assert 0 < len(trajectory.steps) <= 20
    for item in trajectory.steps:
        assert item.action in item.observation.candidate_actions


def test_perturbed_is_deterministic(merchant):
    first = generate_perturbed(merchant, 1, 50, 15, random.Random(42))
    second = generate_perturbed(merchant, 1, 50, 15, random.Random(42))
    assert first == second


def test_recorded_steps_replay_in_engine(gemhunt):
    trajectory = generate_perturbed(gemhunt, 2, 25, 25, random.Random(8))
    state, observation = reset(gemhunt, trajectory.seed)
    for item in trajectory.steps:
        assert item.observation == observation
        state, observation, reward, _ = step(state, item.action)
        assert reward == item.reward
    assert state.cumulative_score == trajectory.final_score


def test_fraction_bounds(gemhunt):
    with pytest.raises(ValueError):
        generate_perturbed(gemhunt, 0, WALKTHROUGH_FRACTION, 5, random.Random(0))
    with pytest.raises(ValueError):
        generate_perturbed(gemhunt, 0, 10, -1, random.Random(0))


def test_walkthrough_trajectory(gemhunt):
    trajectory = generate_walkthrough(gemhunt, 0)
    assert trajectory.final_score == 50
    assert trajectory.terminal
    assert trajectory.walkthrough_fraction == WALKTHROUGH_FRACTION


def test_full_protocol_counts(gemhunt, tmp_path):
    store = TrajectoryStore(tmp_path / "single")
    trajectories, manifest = generate_dataset(
        [gemhunt], FULL_FRACTIONS, 10, [0], 3, store=store
    )
    assert len(trajectories) == 201
    assert manifest.trajectories_per_game == {"gemhunt": 201}

    store = TrajectoryStore(tmp_path / "five")
    _, manifest = generate_dataset(
        [gemhunt], FULL_FRACTIONS, 10, [0, 1, 2, 3, 4], 3, store=store
    )
    assert manifest.trajectory_count == 1005
    assert manifest.expected_per_game() == 1005
    assert sum(1 for item in store.read() if item.final_score == 50) >= 5


def test_desk_counts(games, tmp_path):
    store = TrajectoryStore(tmp_path)
    _, manifest = generate_dataset(games, [0, 25, 50, 75, 95], 2, [0, 1, 2], 5, store=store)
    assert manifest.trajectories_per_game == {game.name: 33 for game in games}
    assert manifest.trajectory_count == 132
    assert len(store.read(["merchant"])) == 33


def test_generation_is_byte_reproducible(games, tmp_path):
    paths = []
    for name, jobs in (("a", 1), ("b", 1), ("c", 2)):
        store = TrajectoryStore(tmp_path / name)
        generate_dataset(games, [0, 50], 2, [0, 1], 8, store=store, master_seed=7, jobs=jobs)
        paths.append(store)
    for game in games:
        reference = paths[0].game_path(game.name).read_bytes()
        assert all(store.game_path(game.name).read_bytes() == reference for store in paths[1:])
    assert paths[0].manifest_path.read_bytes() == paths[2].manifest_path.read_bytes()


def test_master_seed_changes_data(gemhunt, tmp_path):
    first = TrajectoryStore(tmp_path / "a")
    second = TrajectoryStore(tmp_path / "b")
    generate_dataset([gemhunt], [0], 3, [0], 10, store=first, master_seed=1)
    generate_dataset([gemhunt], [0], 3, [0], 10, store=second, master_seed=2)
    assert first.read() != second.read()


def test_missing_store(tmp_path):
    with pytest.raises(DatasetNotFoundError):
        TrajectoryStore(tmp_path / "nothing").read()


def test_walkthrough_only_stats(gemhunt):
    stats = dataset_stats([generate_walkthrough(gemhunt, 0)], {"gemhunt": 50})["gemhunt"]
    assert stats.scores["count"].tolist() == [0] * 9 + [1]
    assert stats.mean_score == 1.0
    assert stats.lengths["count"].sum() == 1


def test_stats_reject_unconfigured_game(gemhunt):
    with pytest.raises(ConfigError, match="gemhunt"):
        dataset_stats([generate_walkthrough(gemhunt, 0)], {"vaultdoor": 25})


def test_random_vaultdoor_scores_near_zero(vaultdoor, tmp_path):
    store = TrajectoryStore(tmp_path)
    trajectories, _ = generate_dataset([vaultdoor], [0], 10, [0, 1, 2], 30, store=store)
    random_only = [item for item in trajectories if item.walkthrough_fraction == 0]
    stats = dataset_stats(random_only, {"vaultdoor": 25})["vaultdoor"]
    assert stats.scores["proportion"].iloc[0] >= 0.6
    assert stats.mean_score < 0.4


def test_write_stats(games, tmp_path):
    store = TrajectoryStore(tmp_path / "data")
    trajectories, _ = generate_dataset(games, [0, 50], 1, [0], 5, store=store)
    summary = write_stats(
        dataset_stats(trajectories, {game.name: game.max_score for game in games}),
        tmp_path / "stats",
    )
    assert summary.exists()
    assert (tmp_path / "stats" / "gemhunt_scores.csv").exists()
    assert (tmp_path / "stats" / "labyrinth_lengths.csv").exists()
