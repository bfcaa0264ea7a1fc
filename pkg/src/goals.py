"""Goal conditions computed from a trajectory's reward sequence.

All values are exact rationals; ``normalize_goal`` turns them into the integer
percentages written into serialized sequences.
"""

from __future__ import annotations

from enum import StrEnum
from fractions import Fraction

from .errors import GoalValueError

GOAL_MAX = 100


class GoalStrategy(StrEnum):
    RTG = "RTG"
    IMR = "ImR"
    FINS = "FinS"
    AVG_RTG = "AvgRTG"

    @classmethod
    def parse(cls, value: str) -> GoalStrategy:
        for item in cls:
            if item.value.lower() == value.strip().lower():
                return item
        valid = ", ".join(item.value for item in cls)
        raise GoalValueError(f"unknown goal strategy {value!r}; expected one of {valid}")


def compute_goals(rewards: list[int], strategy: GoalStrategy) -> list[Fraction]:
    if not rewards:
        raise GoalValueError("cannot compute goals for an empty reward list")

    returns_to_go: list[Fraction] = [Fraction(0)] * len(rewards)
    running = Fraction(0)
    for index in range(len(rewards) - 1, -1, -1):
        running += rewards[index]
        returns_to_go[index] = running

    match strategy:
        case GoalStrategy.RTG:
            return returns_to_go
        case GoalStrategy.IMR:
            return [Fraction(reward) for reward in rewards]
        case GoalStrategy.FINS:
            return [returns_to_go[0]] * len(rewards)
        case GoalStrategy.AVG_RTG:
            last = len(rewards) - 1
            # remaining-step count includes the current step, so t = T divides by 1
            return [rtg / (last - t + 1) for t, rtg in enumerate(returns_to_go)]
    raise GoalValueError(f"unsupported goal strategy {strategy!r}")


def normalize_goal(raw: Fraction | int | float, max_score: int) -> int:
    if max_score <= 0:
        raise GoalValueError(f"max_score must be positive, got {max_score}")
    value = Fraction(raw)
    if value < 0 or value > max_score:
        raise GoalValueError(f"goal {value} outside [0, {max_score}]")
    # int() truncates toward zero
    return int(GOAL_MAX * value / max_score)


def goal_sequence(rewards: list[int], strategy: GoalStrategy, max_score: int) -> list[int]:
    return [normalize_goal(value, max_score) for value in compute_goals(rewards, strategy)]


def optimal_gc_update(
    g: Fraction | float, reward: int, max_score: int
) -> Fraction:
    updated = Fraction(g) - Fraction(reward, max_score)
    return max(updated, Fraction(0))
