from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field

from ..errors import EpisodeFinishedError
from .schemas import (
    GONE,
    INVENTORY,
    ActionRule,
    GameSpec,
    Observation,
    normalize_command,
)

logger = logging.getLogger(__name__)

NOTHING_HAPPENS = "nothing happens"
EMPTY_HANDED = "You are empty-handed."


@dataclass(slots=True)
class EngineState:
    game: GameSpec
    location: str
    item_locations: dict[str, str]
    flags: frozenset[str]
    fired_rewards: frozenset[str]
    rng: random.Random
    cumulative_score: int = 0
    step_count: int = 0
    done: bool = False
    seed: int = 0
    _terminal: bool = field(default=False, repr=False)

    @property
    def terminal(self) -> bool:
        return self._terminal

    @property
    def inventory(self) -> frozenset[str]:
        return frozenset(
            item for item, where in self.item_locations.items() if where == INVENTORY
        )

    def copy(self) -> EngineState:
        rng = random.Random()
        rng.setstate(self.rng.getstate())
        return EngineState(
            game=self.game,
            location=self.location,
            item_locations=dict(self.item_locations),
            flags=self.flags,
            fired_rewards=self.fired_rewards,
            rng=rng,
            cumulative_score=self.cumulative_score,
            step_count=self.step_count,
            done=self.done,
            seed=self.seed,
            _terminal=self._terminal,
        )

    def key(self) -> tuple:
        return (
            self.location,
            tuple(sorted(self.item_locations.items())),
            tuple(sorted(self.flags)),
        )


def _movement_rules(game: GameSpec, state: EngineState) -> list[ActionRule]:
    rules: list[ActionRule] = []
    for direction, exit_ in game.room(state.location).exits.items():
        if not set(exit_.requires) <= state.flags:
            continue
        rules.append(
            ActionRule(
                id=f"go_{direction}",
                pattern=f"go {direction}",
                effects={"move": exit_.to},
                message=f"You go {direction}.",
            )
        )
    return rules


def _holds(rule: ActionRule, state: EngineState) -> bool:
    req = rule.requires
    if req.at is not None and req.at != state.location:
        return False
    inventory = state.inventory
    if not set(req.has) <= inventory:
        return False
    if set(req.lacks) & inventory:
        return False
    if any(state.item_locations.get(item) != state.location for item in req.here):
        return False
    if not set(req.flags) <= state.flags:
        return False
    return not set(req.not_flags) & state.flags


def _applicable(state: EngineState) -> list[ActionRule]:
    explicit = [rule for rule in state.game.rules if _holds(rule, state)]
    return explicit + _movement_rules(state.game, state)


def candidate_actions(state: EngineState) -> list[str]:
    if state.done:
        return []
    seen: dict[str, None] = {}
    for rule in _applicable(state):
        seen.setdefault(rule.pattern, None)
    return list(seen)


def _inventory_text(state: EngineState) -> str:
    names = [
        item.name
        for item in state.game.items
        if state.item_locations.get(item.id) == INVENTORY
    ]
    if not names:
        return EMPTY_HANDED
    return f"You are carrying: {', '.join(names)}."


def observe(state: EngineState, message: str) -> Observation:
    return Observation(
        candidate_actions=candidate_actions(state),
        message=message,
        description=state.game.room(state.location).description,
        inventory=_inventory_text(state),
    )


def reset(game: GameSpec, seed: int) -> tuple[EngineState, Observation]:
    state = EngineState(
        game=game,
        location=game.meta.start_room,
        item_locations={item.id: item.location for item in game.items},
        flags=frozenset(),
        fired_rewards=frozenset(),
        rng=random.Random(seed),
        seed=seed,
    )
    return state, observe(state, game.meta.intro)


def _apply(rule: ActionRule, state: EngineState) -> None:
    effects = rule.effects
    for item in effects.take:
        state.item_locations[item] = INVENTORY
    for item in effects.drop:
        if state.item_locations.get(item) == INVENTORY:
            state.item_locations[item] = state.location
    for item in effects.give:
        state.item_locations[item] = INVENTORY
    for item in effects.consume:
        state.item_locations[item] = GONE
    for item, room_id in effects.place.items():
        state.item_locations[item] = room_id
    if effects.set_flags or effects.clear_flags:
        state.flags = (state.flags | set(effects.set_flags)) - set(effects.clear_flags)
    if effects.move is not None:
        state.location = effects.move
    if effects.end:
        state._terminal = True


def step(
    state: EngineState, action: str
) -> tuple[EngineState, Observation, int, bool]:
    if state.done:
        raise EpisodeFinishedError(
            f"Episode of {state.game.name} already finished after {state.step_count} steps"
        )

    new = state.copy()
    command = normalize_command(action)
    rule = next((item for item in _applicable(new) if item.pattern == command), None)
    failed = False
    if rule is not None:
        stochastic = new.game.stochastic_rule(rule.id)
        if stochastic is not None:
            failed = new.rng.random() < stochastic.failure_probability
    return _transition(new, rule, failed)


def _transition(
    new: EngineState, rule: ActionRule | None, failed: bool
) -> tuple[EngineState, Observation, int, bool]:
    new.step_count += 1
    reward = 0
    if rule is None:
        message = NOTHING_HAPPENS
    elif failed:
        message = new.game.stochastic_rule(rule.id).failure_message
    else:
        message = rule.message
        _apply(rule, new)
        if rule.reward and not (rule.one_shot_reward and rule.id in new.fired_rewards):
            reward = rule.reward
            new.fired_rewards = new.fired_rewards | {rule.id}

    new.cumulative_score += reward
    new.done = new._terminal or new.step_count >= new.game.meta.step_cap
    return new, observe(new, message), reward, new.done


def explore(
    game: GameSpec, seed: int | None = None, max_states: int = 20_000
) -> list[Observation]:
    """Breadth-first walk over reachable live states, returning every observation seen.

    Stochastic rules are explored on both branches.
    """
    start, first = reset(game, game.meta.default_seed if seed is None else seed)
    observations = [first]
    seen = {start.key()}
    queue: deque[EngineState] = deque([start])
    while queue:
        state = queue.popleft()
        for action in candidate_actions(state):
            rule = next(r for r in _applicable(state) if r.pattern == action)
            outcomes = [_transition(state.copy(), rule, failed=False)]
            stochastic = game.stochastic_rule(rule.id)
            if stochastic is not None and stochastic.failure_probability > 0:
                outcomes.append(_transition(state.copy(), rule, failed=True))
            for new, observation, _, done in outcomes:
                if done:
                    continue
                observations.append(observation)
                if new.key() in seen:
                    continue
                if len(seen) >= max_states:
                    logger.warning(
                        "State exploration of %s stopped at %s states", game.name, max_states
                    )
                    return observations
                seen.add(new.key())
                new.step_count = 0
                queue.append(new)
    return observations
