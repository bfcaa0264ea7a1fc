from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import torch

from ..errors import CheckpointNotFoundError
from .config import ModelConfig
from .network import LanguageDecisionModel, build_model

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class Checkpoint:
    config: ModelConfig
    model: LanguageDecisionModel
    vocab_version: str
    step: int = 0

    @classmethod
    def initialize(cls, config: ModelConfig, vocab_version: str) -> Checkpoint:
        return cls(config=config, model=build_model(config), vocab_version=vocab_version)

    def save(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(
            {
                "config": self.config.model_dump(),
                "vocab_version": self.vocab_version,
                "step": self.step,
                "state_dict": self.model.state_dict(),
            },
            path,
        )
        logger.debug("Saved checkpoint at step %s to %s", self.step, path)
        return path

    @classmethod
    def load(cls, path: str | Path) -> Checkpoint:
        path = Path(path)
        if not path.is_file():
            raise CheckpointNotFoundError(f"checkpoint not found: {path}")
        payload = torch.load(path, map_location="cpu", weights_only=True)
        config = ModelConfig.model_validate(payload["config"])
        model = build_model(config)
        model.load_state_dict(payload["state_dict"])
        model.eval()
        return cls(
            config=config,
            model=model,
            vocab_version=payload["vocab_version"],
            step=payload["step"],
        )

    @torch.no_grad()
    def next_token_distribution(
        self, input_ids: list[int], prefix_ids: list[int], bos_id: int
    ) -> torch.Tensor:
        """Categorical over the vocabulary for the output position after ``prefix_ids``."""
        self.model.eval()
        source = torch.tensor([input_ids], dtype=torch.long)
        target = torch.tensor([[bos_id, *prefix_ids]], dtype=torch.long)
        logits = self.model(source, target)[0, -1]
        return torch.softmax(logits.double(), dim=-1)
