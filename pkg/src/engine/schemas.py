from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator

INVENTORY = "inventory"
HIDDEN = "hidden"
GONE = "gone"


class Exit(BaseModel):
    model_config = ConfigDict(extra="forbid")

    to: str
    requires: list[str] = Field(default_factory=list)


class Room(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    description: str = Field(min_length=1)
    exits: dict[str, Exit] = Field(default_factory=dict)

    @field_validator("exits", mode="before")
    @classmethod
    def _expand_exits(cls, value: object) -> object:
        if not isinstance(value, dict):
            return value
        return {
            direction: {"to": target} if isinstance(target, str) else target
            for direction, target in value.items()
        }


class Item(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    name: str = Field(min_length=1)
    location: str


class Preconditions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    at: str | None = None
    has: list[str] = Field(default_factory=list)
    lacks: list[str] = Field(default_factory=list)
    here: list[str] = Field(default_factory=list)
    flags: list[str] = Field(default_factory=list)
    not_flags: list[str] = Field(default_factory=list)


class Effects(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    move: str | None = None
    take: list[str] = Field(default_factory=list)
    drop: list[str] = Field(default_factory=list)
    give: list[str] = Field(default_factory=list)
    consume: list[str] = Field(default_factory=list)
    place: dict[str, str] = Field(default_factory=dict)
    set_flags: list[str] = Field(default_factory=list, alias="set")
    clear_flags: list[str] = Field(default_factory=list, alias="clear")
    end: bool = False


class ActionRule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    pattern: str = Field(min_length=1)
    requires: Preconditions = Field(default_factory=Preconditions)
    effects: Effects = Field(default_factory=Effects)
    reward: int = 0
    message: str = Field(min_length=1)
    one_shot_reward: bool = True

    @field_validator("pattern")
    @classmethod
    def _normalize_pattern(cls, value: str) -> str:
        return normalize_command(value)


class StochasticRule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rule: str
    failure_probability: float = Field(ge=0.0, le=1.0)
    failure_message: str = Field(min_length=1)


class GameMeta(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(min_length=1, pattern=r"^[a-z0-9_]+$")
    max_score: int = Field(gt=0)
    start_room: str
    default_seed: int = 0
    step_cap: int = Field(default=200, gt=0)
    intro: str = Field(default="You look around.", min_length=1)


class GameSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    meta: GameMeta
    rooms: list[Room] = Field(min_length=1)
    items: list[Item] = Field(default_factory=list)
    rules: list[ActionRule] = Field(default_factory=list)
    stochastic_rules: list[StochasticRule] = Field(default_factory=list)
    walkthrough: list[str] = Field(min_length=1)

    _rooms: dict[str, Room] = PrivateAttr(default_factory=dict)
    _items: dict[str, Item] = PrivateAttr(default_factory=dict)
    _stochastic: dict[str, StochasticRule] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: object) -> None:
        self._rooms = {room.id: room for room in self.rooms}
        self._items = {item.id: item for item in self.items}
        self._stochastic = {item.rule: item for item in self.stochastic_rules}

    @property
    def name(self) -> str:
        return self.meta.name

    @property
    def max_score(self) -> int:
        return self.meta.max_score

    @property
    def is_stochastic(self) -> bool:
        return any(item.failure_probability > 0 for item in self.stochastic_rules)

    def room(self, room_id: str) -> Room:
        return self._rooms[room_id]

    def has_room(self, room_id: str) -> bool:
        return room_id in self._rooms

    def item(self, item_id: str) -> Item:
        return self._items[item_id]

    def has_item(self, item_id: str) -> bool:
        return item_id in self._items

    def stochastic_rule(self, rule_id: str) -> StochasticRule | None:
        return self._stochastic.get(rule_id)


class Observation(BaseModel):
    model_config = ConfigDict(frozen=True)

    candidate_actions: list[str]
    message: str
    description: str
    inventory: str


def normalize_command(value: str) -> str:
    return " ".join(value.strip().lower().split())
