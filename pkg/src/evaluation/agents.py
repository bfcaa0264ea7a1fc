from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Protocol, TextIO

from ..codec import Vocabulary, serialize_context, truncate_context
from ..data import Step
from ..decoding import DecodeMode, DecodePolicy, DecodeTrace, decode_step, optimal_goal_token
from ..engine import GameSpec, Observation
from ..errors import DecodeError, SequenceTooLongError
from ..goals import optimal_gc_update
from ..model import Checkpoint
from ..seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class Turn:
    game: GameSpec
    seed: int
    index: int
    history: list[Step]
    observation: Observation

    def context_text(self) -> str:
        """Serialized context at this step: o_0 and o_t in full, placeholders in between."""
        goals: list[int] = []
        for item in self.history:
            if item.goal is None:
                raise ValueError("model contexts need a goal on every previous step")
            goals.append(item.goal)
        current = Step(observation=self.observation, action="", reward=0)
        return serialize_context([*self.history, current], self.index, goals)


@dataclass(slots=True, frozen=True)
class Decision:
    action: str
    goal: int | None = None


class Agent(Protocol):
    name: str

    def begin(self, game: GameSpec, seed: int) -> None: ...

    def decide(self, turn: Turn) -> Decision: ...

    def record(self, reward: int) -> None: ...

    def detached(self) -> Agent:
        """Picklable copy for a worker process, without open trace handles."""
        ...

    def episode_records(self) -> list[DecodeTrace]: ...

    def absorb(self, records: list[DecodeTrace]) -> None: ...


@dataclass(slots=True)
class ScriptedAgent:
    """Replays a fixed action list; ``cycle`` repeats it instead of running dry."""

    actions: list[str]
    cycle: bool = False
    name: str = "scripted"
    _cursor: int = field(default=0, repr=False)

    @classmethod
    def walkthrough(cls, game: GameSpec) -> ScriptedAgent:
        return cls(actions=list(game.walkthrough), name="walkthrough")

    def begin(self, game: GameSpec, seed: int) -> None:
        self._cursor = 0

    def decide(self, turn: Turn) -> Decision:
        if self._cursor >= len(self.actions):
            if not self.cycle or not self.actions:
                raise DecodeError("scripted agent ran out of actions")
            self._cursor = 0
        action = self.actions[self._cursor]
        self._cursor += 1
        return Decision(action=action)

    def record(self, reward: int) -> None:
        pass

    def detached(self) -> ScriptedAgent:
        return replace(self, actions=list(self.actions), _cursor=0)

    def episode_records(self) -> list[DecodeTrace]:
        return []

    def absorb(self, records: list[DecodeTrace]) -> None:
        pass


@dataclass(slots=True)
class RandomAgent:
    master_seed: int = 0
    name: str = "random"
    _rng: random.Random = field(default_factory=random.Random, repr=False)

    def begin(self, game: GameSpec, seed: int) -> None:
        self._rng = random.Random(derive_seed(self.master_seed, "random-agent", game.name, seed))

    def decide(self, turn: Turn) -> Decision:
        return Decision(action=self._rng.choice(turn.observation.candidate_actions))

    def record(self, reward: int) -> None:
        pass

    def detached(self) -> RandomAgent:
        return RandomAgent(master_seed=self.master_seed, name=self.name)

    def episode_records(self) -> list[DecodeTrace]:
        return []

    def absorb(self, records: list[DecodeTrace]) -> None:
        pass


class ModelAgent:
    def __init__(
        self,
        checkpoint: Checkpoint,
        vocab: Vocabulary,
        policy: DecodePolicy,
        *,
        name: str | None = None,
        trace: TextIO | None = None,
    ) -> None:
        if vocab.version != checkpoint.vocab_version:
            raise ValueError(
                f"vocabulary {vocab.version} does not match checkpoint {checkpoint.vocab_version}"
            )
        self.checkpoint = checkpoint
        self.vocab = vocab
        self.policy = policy
        self.name = name or f"model:{policy.label}"
        self.trace = trace
        self.records: list[DecodeTrace] = []
        self._game: GameSpec | None = None
        self._seed = 0
        self._running_goal = Fraction(str(policy.initial_goal))

    def begin(self, game: GameSpec, seed: int) -> None:
        self._game = game
        self._seed = seed
        self.records = []
        self._running_goal = Fraction(str(self.policy.initial_goal))

    def goal_override(self) -> int | None:
        if self.policy.mode is not DecodeMode.OPTIMAL or self._game is None:
            return None
        return optimal_goal_token(self._running_goal, self._game.max_score)

    def decide(self, turn: Turn) -> Decision:
        record = DecodeTrace(
            game=turn.game.name, seed=turn.seed, step=turn.index, policy=self.policy.label,
            context_tokens=0,
        )
        try:
            ids = self.vocab.encode(turn.context_text())
            record.context_tokens = len(ids)
            ids = truncate_context(ids, self.vocab, self.checkpoint.config.max_input_tokens)
            result = decode_step(
                self.checkpoint,
                ids,
                self.policy,
                self.vocab,
                goal_override=self.goal_override(),
                candidates=turn.observation.candidate_actions,
            )
        except (DecodeError, SequenceTooLongError) as exc:
            record.error = str(exc)
            self._write(record)
            raise DecodeError(str(exc)) from exc

        if result.distribution is not None:
            record.entropy = result.distribution.entropy
            record.support_mass = result.distribution.support_mass
        record.goal = result.goal
        record.action = result.action
        self._write(record)
        return Decision(action=result.action, goal=result.goal)

    def record(self, reward: int) -> None:
        if self.policy.mode is DecodeMode.OPTIMAL and self._game is not None:
            self._running_goal = optimal_gc_update(
                self._running_goal, reward, self._game.max_score
            )

    def _write(self, record: DecodeTrace) -> None:
        logger.debug(
            "decode game=%s seed=%s step=%s goal=%s action=%r error=%s",
            record.game, record.seed, record.step, record.goal, record.action, record.error,
        )
        self.records.append(record)
        if self.trace is not None:
            self.trace.write(record.model_dump_json() + "\n")

    def detached(self) -> ModelAgent:
        return ModelAgent(self.checkpoint, self.vocab, self.policy, name=self.name)

    def episode_records(self) -> list[DecodeTrace]:
        return list(self.records)

    def absorb(self, records: list[DecodeTrace]) -> None:
        if self.trace is None:
            return
        for record in records:
            self.trace.write(record.model_dump_json() + "\n")


def open_trace(path: Path | None) -> TextIO | None:
    if path is None:
        return None
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", encoding="utf-8", newline="\n")
