from __future__ import annotations

from pydantic import BaseModel, Field, computed_field, model_validator

from ..engine.schemas import Observation

WALKTHROUGH_FRACTION = 100


class Step(BaseModel):
    observation: Observation
    action: str
    reward: int
    goal: int | None = None


class Trajectory(BaseModel):
    game: str
    seed: int
    # None for evaluation rollouts
    walkthrough_fraction: int | None = Field(default=None, ge=0, le=WALKTHROUGH_FRACTION)
    repeat: int = 0
    steps: list[Step] = Field(default_factory=list)
    final_score: int = 0
    terminal: bool = False

    @model_validator(mode="after")
    def _check_score(self) -> Trajectory:
        total = sum(item.reward for item in self.steps)
        if total != self.final_score:
            raise ValueError(
                f"final_score {self.final_score} != sum of step rewards {total}"
            )
        return self

    @property
    def rewards(self) -> list[int]:
        return [item.reward for item in self.steps]

    @property
    def actions(self) -> list[str]:
        return [item.action for item in self.steps]

    def sort_key(self) -> tuple[str, int, int, int]:
        fraction = -1 if self.walkthrough_fraction is None else self.walkthrough_fraction
        return (self.game, self.seed, fraction, self.repeat)


class DatasetManifest(BaseModel):
    games: list[str]
    fractions: list[int]
    repeats_per_fraction: int = Field(ge=1)
    seeds: list[int]
    random_steps: int = Field(ge=0)
    master_seed: int
    trajectories_per_game: dict[str, int] = Field(default_factory=dict)

    @computed_field
    @property
    def trajectory_count(self) -> int:
        return sum(self.trajectories_per_game.values())

    def expected_per_game(self) -> int:
        return len(self.seeds) * (len(self.fractions) * self.repeats_per_fraction + 1)
