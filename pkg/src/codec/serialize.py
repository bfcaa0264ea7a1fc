from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from pydantic import BaseModel

from ..data.schemas import Step, Trajectory
from ..engine.schemas import Observation
from ..errors import SplitIndexError
from ..goals import GoalStrategy, goal_sequence
from .tokens import (
    ACTION_MARKER,
    ACTIONS_MARKER,
    DELIMITER,
    DESCRIPTION_MARKER,
    GOAL_MARKER,
    INVENTORY_MARKER,
    PLACEHOLDER,
    STATE_MARKER,
)


class SerializedPair(BaseModel):
    input_text: str
    output_text: str
    split_index: int
    game: str
    goal: int


@dataclass(slots=True, frozen=True)
class ParsedOutput:
    goal: int | None
    action: str | None
    observation: str | None


def serialize_observation(observation: Observation) -> str:
    return (
        f"{ACTIONS_MARKER} {', '.join(observation.candidate_actions)} {DELIMITER} "
        f"{STATE_MARKER} {observation.message} {DELIMITER} "
        f"{DESCRIPTION_MARKER} {observation.description} {DELIMITER} "
        f"{INVENTORY_MARKER} {observation.inventory} {DELIMITER}"
    )


def serialize_goal(goal: int) -> str:
    return f"{GOAL_MARKER} {goal} {DELIMITER}"


def serialize_action(action: str) -> str:
    return f"{ACTION_MARKER} {action} {DELIMITER}"


def serialize_context(steps: list[Step], t: int, goals: list[int]) -> str:
    """Input side of a split at ``t``: o_0, then (g_i, a_i, o_{i+1}) for i < t.

    Only o_0 and o_t are written in full; every observation in between becomes
    the placeholder token.
    """
    if not 0 <= t < len(steps):
        raise SplitIndexError(f"split index {t} outside [0, {len(steps) - 1}]")
    parts = [serialize_observation(steps[0].observation)]
    for index in range(t):
        parts.append(serialize_goal(goals[index]))
        parts.append(serialize_action(steps[index].action))
        if index + 1 == t:
            parts.append(serialize_observation(steps[t].observation))
        else:
            parts.append(PLACEHOLDER)
    return " ".join(parts)


def serialize_target(goal: int, action: str, next_observation: Observation | None) -> str:
    text = f"{serialize_goal(goal)} {serialize_action(action)}"
    if next_observation is not None:
        text = f"{text} {serialize_observation(next_observation)}"
    return text


def serialize_pair(
    trajectory: Trajectory, t: int, strategy: GoalStrategy, max_score: int
) -> SerializedPair:
    steps = trajectory.steps
    last = len(steps) - 1
    if not 0 <= t <= last:
        raise SplitIndexError(f"split index {t} outside [0, {last}]")
    goals = goal_sequence(trajectory.rewards, strategy, max_score)
    next_observation = steps[t + 1].observation if t < last else None
    return SerializedPair(
        input_text=serialize_context(steps, t, goals),
        output_text=serialize_target(goals[t], steps[t].action, next_observation),
        split_index=t,
        game=trajectory.game,
        goal=goals[t],
    )


_DELIM = re.escape(DELIMITER)
_GOAL_RE = re.compile(rf"^\s*{re.escape(GOAL_MARKER)}\s+(\d{{1,3}})\s+{_DELIM}")
_ACTION_RE = re.compile(rf"(?<!\S){re.escape(ACTION_MARKER)}\s+(\S.*?)\s+{_DELIM}")


def parse_output(text: str) -> ParsedOutput:
    goal: int | None = None
    cursor = 0
    goal_match = _GOAL_RE.match(text)
    if goal_match is not None and int(goal_match.group(1)) <= 100:
        goal = int(goal_match.group(1))
        cursor = goal_match.end()

    action: str | None = None
    action_match = _ACTION_RE.search(text, cursor)
    if action_match is not None and GOAL_MARKER not in action_match.group(1).split():
        action = action_match.group(1)
        cursor = action_match.end()

    observation: str | None = None
    if action is not None:
        rest = text[cursor:].strip()
        if rest.startswith(ACTIONS_MARKER):
            observation = rest
    return ParsedOutput(goal=goal, action=action, observation=observation)


def export_pairs(pairs: list[SerializedPair], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for pair in pairs:
            handle.write(pair.model_dump_json())
            handle.write("\n")
