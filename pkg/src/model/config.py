from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..goals import GoalStrategy


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    vocab_size: int = Field(default=0, ge=0)
    model_width: int = Field(default=128, gt=0)
    encoder_layers: int = Field(default=2, ge=1)
    decoder_layers: int = Field(default=2, ge=1)
    attention_heads: int = Field(default=4, ge=1)
    feedforward_width: int = Field(default=256, gt=0)
    max_input_tokens: int = Field(default=512, gt=0)
    max_output_tokens: int = Field(default=128, gt=0)
    dropout: float = Field(default=0.0, ge=0.0, lt=1.0)
    init_seed: int = 0

    @model_validator(mode="after")
    def _check_heads(self) -> ModelConfig:
        if self.model_width % self.attention_heads:
            raise ValueError(
                f"model_width {self.model_width} is not divisible by "
                f"attention_heads {self.attention_heads}"
            )
        return self


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    strategy: GoalStrategy = GoalStrategy.RTG
    learning_rate: float = Field(default=1e-3, gt=0)
    batch_size: int = Field(default=16, ge=1)
    gradient_accumulation: int = Field(default=1, ge=1)
    epochs: int = Field(default=60, ge=1)
    lambda_: float = Field(default=0.5, ge=0.0, alias="lambda")
    samples_per_trajectory: int = Field(default=2, ge=1)
    shuffle_seed: int = 0
    grad_clip: float = Field(default=1.0, gt=0)
    checkpoint_every: int = Field(default=200, ge=1)
    log_every: int = Field(default=10, ge=1)
