from __future__ import annotations

import hashlib
import json
import logging
import re
from collections.abc import Iterable
from pathlib import Path

from ..engine import EMPTY_HANDED, NOTHING_HAPPENS, GameSpec
from ..errors import ConfigError, VocabularyNotFoundError
from .tokens import (
    BOS,
    GOAL_MARKER,
    GOAL_VALUES,
    PAD,
    SPECIAL_TOKENS,
    UNK,
    goal_token,
)

logger = logging.getLogger(__name__)

# special tokens are split out even when glued to a word; longest first
_SPECIAL_RE = re.compile(
    "(" + "|".join(re.escape(token) for token in sorted(SPECIAL_TOKENS, key=len, reverse=True)) + ")"
)
_GOAL_NUMBER_RE = re.compile(r"^(?:0|[1-9]\d{0,2})$")


def _split_words(text: str) -> list[str]:
    words: list[str] = []
    for chunk in _SPECIAL_RE.split(text):
        if chunk in SPECIAL_TOKENS:
            words.append(chunk)
        else:
            words.extend(chunk.split())
    return words


class Vocabulary:
    def __init__(self, tokens: list[str]) -> None:
        if len(set(tokens)) != len(tokens):
            raise ValueError("vocabulary tokens must be unique")
        self.tokens = list(tokens)
        self._ids = {token: index for index, token in enumerate(self.tokens)}
        self.pad_id = self._ids[PAD]
        self.bos_id = self._ids[BOS]
        self.unk_id = self._ids[UNK]
        self.goal_ids = [self._ids[goal_token(value)] for value in GOAL_VALUES]
        self._goal_values = {token_id: value for value, token_id in enumerate(self.goal_ids)}

    @classmethod
    def build(cls, words: Iterable[str]) -> Vocabulary:
        reserved = [*SPECIAL_TOKENS, *(goal_token(value) for value in GOAL_VALUES)]
        corpus = sorted(set(words) - set(reserved))
        return cls(reserved + corpus)

    @classmethod
    def from_games(cls, games: Iterable[GameSpec]) -> Vocabulary:
        return cls.build(corpus_words(games))

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def version(self) -> str:
        digest = hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()
        return digest[:12]

    def id_of(self, token: str) -> int:
        return self._ids.get(token, self.unk_id)

    def goal_id(self, value: int) -> int:
        return self.goal_ids[value]

    def goal_value(self, token_id: int) -> int | None:
        return self._goal_values.get(token_id)

    def encode(self, text: str) -> list[int]:
        ids: list[int] = []
        previous = None
        for word in _split_words(text):
            if (
                previous == GOAL_MARKER
                and _GOAL_NUMBER_RE.match(word)
                and int(word) in GOAL_VALUES
            ):
                ids.append(self.goal_id(int(word)))
            else:
                ids.append(self.id_of(word))
            previous = word
        return ids

    def decode(self, ids: Iterable[int]) -> str:
        words: list[str] = []
        for token_id in ids:
            if token_id in (self.pad_id, self.bos_id):
                continue
            value = self.goal_value(token_id)
            words.append(str(value) if value is not None else self.tokens[token_id])
        return " ".join(words)

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"version": self.version, "tokens": self.tokens}
        path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> Vocabulary:
        if not path.is_file():
            raise VocabularyNotFoundError(
                f"vocabulary file {path} does not exist; run gen-data first"
            )
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
            vocab = cls(payload["tokens"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"vocabulary file {path} is unreadable: {exc}") from exc
        if vocab.version != payload.get("version"):
            raise ConfigError(f"vocabulary file {path} is corrupted (version mismatch)")
        return vocab


def _phrase_words(phrase: str, *suffixes: str) -> list[str]:
    words = phrase.split()
    return words + [words[-1] + suffix for suffix in suffixes]


def corpus_words(games: Iterable[GameSpec]) -> set[str]:
    """Every word an observation, action or message of these games can contain.

    Candidate lists are comma-joined and inventories end with a period, so the
    last word of every action pattern and item name also gets those variants.
    """
    words: set[str] = set()
    for text in (NOTHING_HAPPENS, EMPTY_HANDED, "You are carrying:"):
        words.update(text.split())
    for game in games:
        texts = [game.meta.intro]
        texts.extend(room.description for room in game.rooms)
        texts.extend(rule.message for rule in game.rules)
        texts.extend(item.failure_message for item in game.stochastic_rules)
        for text in texts:
            words.update(text.split())
        for room in game.rooms:
            for direction in room.exits:
                words.update(_phrase_words(f"go {direction}", ","))
                words.update(f"You go {direction}.".split())
        for rule in game.rules:
            words.update(_phrase_words(rule.pattern, ","))
        for action in game.walkthrough:
            words.update(_phrase_words(action, ","))
        for item in game.items:
            words.update(_phrase_words(item.name, ",", "."))
    return words
