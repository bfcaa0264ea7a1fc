import random
from fractions import Fraction

import pytest

from src.errors import GoalValueError
from src.goals import (
    GoalStrategy,
    compute_goals,
    goal_sequence,
    normalize_goal,
    optimal_gc_update,
)


def _brute_force(rewards, strategy):
    last = len(rewards) - 1
    values = []
    for t in range(len(rewards)):
        remaining = sum(rewards[i] for i in range(t, last + 1))
        if strategy is GoalStrategy.RTG:
            values.append(Fraction(remaining))
        elif strategy is GoalStrategy.IMR:
            values.append(Fraction(rewards[t]))
        elif strategy is GoalStrategy.FINS:
            values.append(Fraction(sum(rewards)))
        else:
            values.append(Fraction(remaining, last - t + 1))
    return values


def test_zero_rewards():
    for strategy in GoalStrategy:
        assert compute_goals([0, 0, 0], strategy) == [0, 0, 0]


@pytest.mark.parametrize(
    ("strategy", "expected"),
    [
        (GoalStrategy.RTG, [3, 2, 2]),
        (GoalStrategy.FINS, [3, 3, 3]),
        (GoalStrategy.IMR, [1, 0, 2]),
        (GoalStrategy.AVG_RTG, [1, 1, 2]),
    ],
)
def test_small_example(strategy, expected):
    assert compute_goals([1, 0, 2], strategy) == expected


def test_empty_rewards_rejected():
    with pytest.raises(GoalValueError):
        compute_goals([], GoalStrategy.RTG)


def test_strategies_match_brute_force():
    rng = random.Random(1234)
    for _ in range(1000):
        rewards = [rng.randint(0, 10) for _ in range(rng.randint(1, 50))]
        for strategy in GoalStrategy:
            assert compute_goals(rewards, strategy) == _brute_force(rewards, strategy)


def test_first_rtg_equals_final_score():
    rng = random.Random(5)
    for _ in range(200):
        rewards = [rng.randint(0, 10) for _ in range(rng.randint(1, 30))]
        assert compute_goals(rewards, GoalStrategy.RTG)[0] == sum(rewards)
        assert set(compute_goals(rewards, GoalStrategy.FINS)) == {sum(rewards)}


@pytest.mark.parametrize(
    ("raw", "max_score", "expected"),
    [(175, 400, 43), (50, 50, 100), (0, 50, 0), (Fraction(1, 3), 1, 33)],
)
def test_normalize_examples(raw, max_score, expected):
    assert normalize_goal(raw, max_score) == expected


def test_normalize_matches_rational_truncation():
    rng = random.Random(99)
    for _ in range(1000):
        max_score = rng.randint(1, 1000)
        raw = Fraction(rng.randint(0, max_score * 7), 7)
        if raw > max_score:
            raw = Fraction(max_score)
        expected = (100 * raw.numerator) // (raw.denominator * max_score)
        assert normalize_goal(raw, max_score) == expected


def test_normalize_out_of_range():
    with pytest.raises(GoalValueError):
        normalize_goal(51, 50)
    with pytest.raises(GoalValueError):
        normalize_goal(-1, 50)
    with pytest.raises(GoalValueError):
        normalize_goal(1, 0)


def test_goal_sequence_for_gemhunt_walkthrough():
    rewards = [10, 0, 5, 10, 10, 5, 0, 10]
    assert goal_sequence(rewards, GoalStrategy.RTG, 50) == [100, 80, 80, 70, 50, 30, 20, 20]


@pytest.mark.parametrize(
    ("g", "reward", "max_score", "expected"),
    [
        (Fraction(1), 10, 40, Fraction(3, 4)),
        (Fraction(1, 2), 0, 40, Fraction(1, 2)),
        (Fraction(1, 4), 100, 400, Fraction(0)),
        (Fraction(1, 10), 10, 40, Fraction(0)),
    ],
)
def test_optimal_gc_update(g, reward, max_score, expected):
    assert optimal_gc_update(g, reward, max_score) == expected


def test_strategy_parse():
    assert GoalStrategy.parse("avgrtg") is GoalStrategy.AVG_RTG
    with pytest.raises(GoalValueError, match="RTG, ImR, FinS, AvgRTG"):
        GoalStrategy.parse("bogus")
