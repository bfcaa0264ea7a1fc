from __future__ import annotations

import logging
from enum import StrEnum

from pydantic import BaseModel

from ..data import Step, Trajectory
from ..engine import GameSpec, reset, step
from ..errors import DecodeError
from .agents import Agent, Turn

logger = logging.getLogger(__name__)


class TerminationReason(StrEnum):
    GAME_END = "game_end"
    INVALID_SEQUENCE = "invalid_sequence"
    STEP_CAP = "step_cap"


class Episode(BaseModel):
    agent: str
    game: str
    seed: int
    max_score: int
    score: int
    length: int
    reason: TerminationReason
    trajectory: Trajectory

    @property
    def normalized_score(self) -> float:
        return self.score / self.max_score


def rollout(agent: Agent, game: GameSpec, seed: int) -> Episode:
    """Play one closed-loop episode: decide, execute, extend the history, repeat.

    Decode failures end the episode as an invalid sequence; they never raise.
    """
    state, observation = reset(game, seed)
    agent.begin(game, seed)
    history: list[Step] = []
    reason = TerminationReason.STEP_CAP

    while not state.done:
        turn = Turn(
            game=game, seed=seed, index=len(history), history=history, observation=observation
        )
        try:
            decision = agent.decide(turn)
        except DecodeError as exc:
            logger.debug(
                "Invalid sequence in %s seed=%s step=%s: %s", game.name, seed, turn.index, exc
            )
            reason = TerminationReason.INVALID_SEQUENCE
            break
        state, next_observation, reward, _ = step(state, decision.action)
        history.append(
            Step(
                observation=observation,
                action=decision.action,
                reward=reward,
                goal=decision.goal,
            )
        )
        agent.record(reward)
        observation = next_observation
    else:
        reason = TerminationReason.GAME_END if state.terminal else TerminationReason.STEP_CAP

    trajectory = Trajectory(
        game=game.name,
        seed=seed,
        steps=history,
        final_score=state.cumulative_score,
        terminal=state.terminal,
    )
    logger.debug(
        "Episode %s seed=%s agent=%s score=%s/%s length=%s reason=%s",
        game.name, seed, agent.name, state.cumulative_score, game.max_score, len(history), reason,
    )
    return Episode(
        agent=agent.name,
        game=game.name,
        seed=seed,
        max_score=game.max_score,
        score=state.cumulative_score,
        length=len(history),
        reason=reason,
        trajectory=trajectory,
    )
