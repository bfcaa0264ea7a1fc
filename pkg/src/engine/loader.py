from __future__ import annotations

import logging
from functools import cache
from importlib import resources
from pathlib import Path

import yaml
from pydantic import ValidationError

from ..errors import GameSpecError
from .engine import NOTHING_HAPPENS, reset, step
from .schemas import HIDDEN, INVENTORY, GameSpec

logger = logging.getLogger(__name__)

BUNDLED_GAMES = ("gemhunt", "vaultdoor", "merchant", "labyrinth")


def load_game(spec_text: str) -> GameSpec:
    try:
        data = yaml.safe_load(spec_text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        location = f"line {mark.line + 1}" if mark is not None else None
        raise GameSpecError(f"malformed game spec: {exc}", location) from exc
    if not isinstance(data, dict):
        raise GameSpecError("game spec must be a mapping with meta/rooms/rules sections")

    try:
        game = GameSpec.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise GameSpecError(first["msg"], location) from exc

    _check_references(game)
    _check_rewards(game)
    _check_walkthrough(game)
    return game


def load_game_file(path: str | Path) -> GameSpec:
    path = Path(path)
    if not path.exists():
        raise GameSpecError(f"game spec file not found: {path}")
    try:
        return load_game(path.read_text(encoding="utf-8"))
    except GameSpecError as exc:
        raise GameSpecError(str(exc), str(path)) from exc


@cache
def load_bundled(name: str) -> GameSpec:
    if name not in BUNDLED_GAMES:
        raise GameSpecError(
            f"unknown bundled game {name!r}; expected one of {', '.join(BUNDLED_GAMES)}"
        )
    text = resources.files("src.engine.games").joinpath(f"{name}.yaml").read_text(
        encoding="utf-8"
    )
    return load_game(text)


def bundled_games() -> list[GameSpec]:
    return [load_bundled(name) for name in BUNDLED_GAMES]


def resolve_game(ref: str) -> GameSpec:
    if ref in BUNDLED_GAMES:
        return load_bundled(ref)
    return load_game_file(ref)


def _check_references(game: GameSpec) -> None:
    room_ids = [room.id for room in game.rooms]
    if len(set(room_ids)) != len(room_ids):
        raise GameSpecError("duplicate room id", "rooms")
    rule_ids = [rule.id for rule in game.rules]
    if len(set(rule_ids)) != len(rule_ids):
        raise GameSpecError("duplicate rule id", "rules")

    if not game.has_room(game.meta.start_room):
        raise GameSpecError(
            f"start room references unknown room {game.meta.start_room!r}", "meta.start_room"
        )
    for room in game.rooms:
        for direction, exit_ in room.exits.items():
            if not game.has_room(exit_.to):
                raise GameSpecError(
                    f"exit {direction!r} references unknown room {exit_.to!r}",
                    f"rooms.{room.id}.exits",
                )
        if not any(not exit_.requires for exit_ in room.exits.values()):
            raise GameSpecError(
                "room needs at least one ungated exit so live states always have candidates",
                f"rooms.{room.id}",
            )

    valid_locations = set(room_ids) | {INVENTORY, HIDDEN}
    for item in game.items:
        if item.location not in valid_locations:
            raise GameSpecError(
                f"item starts in unknown location {item.location!r}", f"items.{item.id}"
            )

    for rule in game.rules:
        where = f"rules.{rule.id}"
        req, eff = rule.requires, rule.effects
        rooms_used = [req.at, eff.move, *eff.place.values()]
        for room_id in rooms_used:
            if room_id is not None and not game.has_room(room_id):
                raise GameSpecError(f"references unknown room {room_id!r}", where)
        items_used = [
            *req.has, *req.lacks, *req.here,
            *eff.take, *eff.drop, *eff.give, *eff.consume, *eff.place,
        ]
        for item_id in items_used:
            if not game.has_item(item_id):
                raise GameSpecError(f"references unknown item {item_id!r}", where)

    for stochastic in game.stochastic_rules:
        if stochastic.rule not in rule_ids:
            raise GameSpecError(
                f"stochastic entry references unknown rule {stochastic.rule!r}",
                "stochastic_rules",
            )


def _check_rewards(game: GameSpec) -> None:
    for rule in game.rules:
        if rule.reward and not rule.one_shot_reward:
            raise GameSpecError(
                "rewarding rules must be one-shot (reward triggers fire once per episode)",
                f"rules.{rule.id}",
            )
    total = sum(rule.reward for rule in game.rules)
    if total != game.max_score:
        raise GameSpecError(
            f"rule rewards sum to {total} != max_score {game.max_score}", "rules"
        )


def _check_walkthrough(game: GameSpec) -> None:
    state, _ = reset(game, game.meta.default_seed)
    for index, action in enumerate(game.walkthrough):
        if state.done:
            raise GameSpecError(
                f"walkthrough ends the game early at action {index} ({action!r})",
                "walkthrough",
            )
        state, observation, _, _ = step(state, action)
        if observation.message == NOTHING_HAPPENS:
            raise GameSpecError(
                f"walkthrough action {index} ({action!r}) matches no rule", "walkthrough"
            )
    if state.cumulative_score != game.max_score:
        raise GameSpecError(
            f"walkthrough score {state.cumulative_score} != max_score {game.max_score}",
            "walkthrough",
        )
    logger.debug(
        "Validated %s: %s rooms, %s rules, walkthrough of %s actions",
        game.name, len(game.rooms), len(game.rules), len(game.walkthrough),
    )
