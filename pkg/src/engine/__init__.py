from .engine import (
    EMPTY_HANDED,
    NOTHING_HAPPENS,
    EngineState,
    candidate_actions,
    explore,
    reset,
    step,
)
from .loader import (
    BUNDLED_GAMES,
    bundled_games,
    load_bundled,
    load_game,
    load_game_file,
    resolve_game,
)
from .schemas import ActionRule, GameSpec, Observation

__all__ = [
    "ActionRule",
    "BUNDLED_GAMES",
    "EMPTY_HANDED",
    "EngineState",
    "GameSpec",
    "NOTHING_HAPPENS",
    "Observation",
    "bundled_games",
    "candidate_actions",
    "explore",
    "load_bundled",
    "load_game",
    "load_game_file",
    "reset",
    "resolve_game",
    "step",
]
