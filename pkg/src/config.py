from __future__ import annotations

import logging
from pathlib import Path

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from .engine import BUNDLED_GAMES, GameSpec, resolve_game
from .errors import ConfigError
from .goals import GoalStrategy
from .model import ModelConfig, TrainConfig

logger = logging.getLogger(__name__)


class DataConfig(BaseModel):
    games: list[str] = Field(default_factory=lambda: list(BUNDLED_GAMES))
    fractions: list[int] = Field(default_factory=lambda: [0, 25, 50, 75, 95])
    repeats: int = Field(default=2, ge=1)
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2])
    random_steps: int = Field(default=30, ge=0)

    @field_validator("fractions")
    @classmethod
    def _check_fractions(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("at least one walkthrough fraction is required")
        for fraction in value:
            if not 0 <= fraction < 100:
                raise ValueError(f"walkthrough fraction {fraction} outside [0, 100)")
        return value


class EvalConfig(BaseModel):
    # disjoint from the data-collection seeds
    seeds: list[int] = Field(default_factory=lambda: [100, 101, 102, 103, 104])
    games: list[str] | None = None
    policies: list[str] = Field(default_factory=lambda: ["tilt:10", "optimal"])
    alphas: list[float] = Field(default_factory=lambda: [0.0, 1.0, 10.0, 20.0])
    strategy_alpha: float = Field(default=10.0, ge=0.0)

    @field_validator("seeds")
    @classmethod
    def _check_seeds(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("at least one evaluation seed is required")
        return value


class AblationConfig(BaseModel):
    strategies: list[GoalStrategy] = Field(default_factory=lambda: list(GoalStrategy))
    lambdas: list[float] = Field(default_factory=lambda: [0.5, 0.0])
    sweep_strategy: GoalStrategy = GoalStrategy.RTG
    include_il: bool = True
    include_random: bool = True


class PathsConfig(BaseModel):
    dataset_dir: Path = Path("runs/desk/data")
    checkpoint_dir: Path = Path("runs/desk/checkpoints")
    report_dir: Path = Path("runs/desk/reports")

    @property
    def vocab_path(self) -> Path:
        return self.checkpoint_dir / "vocab.json"

    def series_dir(self, strategy: GoalStrategy, lambda_: float) -> Path:
        return self.checkpoint_dir / f"{strategy.value}_lambda{lambda_:g}"

    @property
    def il_dir(self) -> Path:
        return self.checkpoint_dir / "IL"

    def ensure(self) -> None:
        for path in (self.dataset_dir, self.checkpoint_dir, self.report_dir):
            try:
                path.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise ConfigError(f"cannot create directory {path}: {exc}") from exc


class RunConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="LDT_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    master_seed: int = 0
    jobs: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    data: DataConfig = Field(default_factory=DataConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    ablation: AblationConfig = Field(default_factory=AblationConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # file values arrive as init kwargs; the environment overrides them
        return env_settings, dotenv_settings, init_settings, file_secret_settings

    @classmethod
    def from_file(cls, path: str | Path | None = None) -> RunConfig:
        data: dict = {}
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            try:
                data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
            except yaml.YAMLError as exc:
                raise ConfigError(f"malformed config {path}: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError(f"config {path} must be a mapping")
        try:
            config = cls(**data)
        except ValidationError as exc:
            first = exc.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            raise ConfigError(f"{location}: {first['msg']}") from exc
        logger.debug("Loaded run config from %s", path or "defaults")
        return config

    def with_overrides(self, *, master_seed: int | None = None, jobs: int | None = None) -> RunConfig:
        update: dict = {}
        if master_seed is not None:
            update["master_seed"] = master_seed
        if jobs is not None:
            update["jobs"] = jobs
        return self.model_copy(update=update)

    def games(self) -> list[GameSpec]:
        return [resolve_game(ref) for ref in self.data.games]

    def eval_games(self) -> list[GameSpec]:
        return [resolve_game(ref) for ref in (self.eval.games or self.data.games)]
