from __future__ import annotations

import logging
import math
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import torch
from pydantic import BaseModel

from ..codec import EncodedPair, Vocabulary, encode_pair, serialize_pair
from ..data import Trajectory
from ..errors import ConfigError, TrainingDivergedError
from ..goals import GoalStrategy
from .checkpoint import Checkpoint
from .config import ModelConfig, TrainConfig
from .objective import batch_loss, collate, span_losses

logger = logging.getLogger(__name__)

FINAL_CHECKPOINT = "final.pt"


class TrainingMetrics(BaseModel):
    step: int
    epoch: int
    loss: float
    loss_goal_action: float
    loss_observation: float | None = None


class TrainingData(Protocol):
    def epoch_pairs(self, rng: random.Random) -> list[EncodedPair]: ...


@dataclass(slots=True)
class FixedPairs:
    pairs: list[EncodedPair]

    def epoch_pairs(self, rng: random.Random) -> list[EncodedPair]:
        return list(self.pairs)


@dataclass(slots=True)
class TrajectoryPairs:
    """Draws fresh split indices t ~ U[0, T] for every trajectory each epoch."""

    trajectories: list[Trajectory]
    max_scores: dict[str, int]
    vocab: Vocabulary
    strategy: GoalStrategy
    model_config: ModelConfig
    samples_per_trajectory: int = 1

    def epoch_pairs(self, rng: random.Random) -> list[EncodedPair]:
        pairs: list[EncodedPair] = []
        for trajectory in self.trajectories:
            if not trajectory.steps:
                continue
            for _ in range(self.samples_per_trajectory):
                t = rng.randint(0, len(trajectory.steps) - 1)
                serialized = serialize_pair(
                    trajectory, t, self.strategy, self.max_scores[trajectory.game]
                )
                pairs.append(
                    encode_pair(
                        serialized,
                        self.vocab,
                        self.model_config.max_input_tokens,
                        self.model_config.max_output_tokens,
                    )
                )
        return pairs


@dataclass(slots=True)
class TrainingRun:
    checkpoint: Checkpoint
    history: list[TrainingMetrics] = field(default_factory=list)
    saved: list[Path] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.history[-1].loss


@dataclass(slots=True)
class SpanReport:
    goal_action: float
    observation: float
    observation_stderr: float
    pairs: int


def loss(
    checkpoint: Checkpoint, pairs: list[EncodedPair], lambda_: float, vocab: Vocabulary
) -> torch.Tensor:
    batch = collate(pairs, vocab.pad_id, vocab.bos_id)
    total, _ = batch_loss(checkpoint.model, batch, lambda_)
    return total


@torch.no_grad()
def span_report(
    checkpoint: Checkpoint, pairs: list[EncodedPair], vocab: Vocabulary, batch_size: int = 32
) -> SpanReport:
    """Mean span losses over held-out pairs, with the standard error of the observation term."""
    checkpoint.model.eval()
    goal_action: list[float] = []
    observation: list[float] = []
    for start in range(0, len(pairs), batch_size):
        batch = collate(pairs[start : start + batch_size], vocab.pad_id, vocab.bos_id)
        spans = span_losses(checkpoint.model, batch)
        goal_action.extend(spans.goal_action.tolist())
        observation.extend(
            value
            for value, present in zip(
                spans.observation.tolist(), spans.has_observation.tolist(), strict=True
            )
            if present
        )
    if not goal_action:
        raise ValueError("span report needs at least one pair")
    stderr = (
        statistics.stdev(observation) / math.sqrt(len(observation))
        if len(observation) > 1
        else 0.0
    )
    return SpanReport(
        goal_action=statistics.fmean(goal_action),
        observation=statistics.fmean(observation) if observation else 0.0,
        observation_stderr=stderr,
        pairs=len(goal_action),
    )


def train(
    checkpoint: Checkpoint,
    data: TrainingData,
    config: TrainConfig,
    vocab: Vocabulary,
    *,
    checkpoint_dir: Path | None = None,
    metrics_path: Path | None = None,
) -> TrainingRun:
    """Adam at a constant learning rate over teacher-forced batches.

    The checkpoint's model is updated in place; the returned run carries it
    together with the per-step metrics.
    """
    if vocab.version != checkpoint.vocab_version:
        raise ConfigError(
            f"vocabulary {vocab.version} does not match checkpoint vocabulary "
            f"{checkpoint.vocab_version}"
        )
    model = checkpoint.model
    model.train()
    torch.manual_seed(config.shuffle_seed)
    rng = random.Random(config.shuffle_seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    run = TrainingRun(checkpoint=checkpoint)

    metrics_handle = None
    if metrics_path is not None:
        metrics_path.parent.mkdir(parents=True, exist_ok=True)
        metrics_handle = metrics_path.open("w", encoding="utf-8", newline="\n")

    try:
        for epoch in range(config.epochs):
            pairs = data.epoch_pairs(rng)
            if not pairs:
                raise ValueError("training data produced no pairs")
            rng.shuffle(pairs)
            batches = [
                pairs[start : start + config.batch_size]
                for start in range(0, len(pairs), config.batch_size)
            ]
            for group_start in range(0, len(batches), config.gradient_accumulation):
                group = batches[group_start : group_start + config.gradient_accumulation]
                record = _optimizer_step(
                    model, optimizer, group, config, vocab, checkpoint.step + 1, epoch
                )
                checkpoint.step = record.step
                run.history.append(record)
                if metrics_handle is not None:
                    metrics_handle.write(record.model_dump_json() + "\n")
                if record.step % config.log_every == 0:
                    logger.info(
                        "step=%s epoch=%s loss=%.4f ga=%.4f obs=%s",
                        record.step,
                        epoch,
                        record.loss,
                        record.loss_goal_action,
                        "-" if record.loss_observation is None
                        else f"{record.loss_observation:.4f}",
                    )
                if checkpoint_dir is not None and record.step % config.checkpoint_every == 0:
                    run.saved.append(
                        checkpoint.save(checkpoint_dir / f"step_{record.step:06d}.pt")
                    )
    finally:
        if metrics_handle is not None:
            metrics_handle.close()

    model.eval()
    if checkpoint_dir is not None:
        run.saved.append(checkpoint.save(checkpoint_dir / FINAL_CHECKPOINT))
    logger.info("Training finished after %s optimizer steps", checkpoint.step)
    return run


def _optimizer_step(
    model: torch.nn.Module,
    optimizer: torch.optim.Optimizer,
    group: list[list[EncodedPair]],
    config: TrainConfig,
    vocab: Vocabulary,
    step: int,
    epoch: int,
) -> TrainingMetrics:
    optimizer.zero_grad()
    total_value = 0.0
    ga_values: list[float] = []
    obs_values: list[float] = []
    for pairs in group:
        batch = collate(pairs, vocab.pad_id, vocab.bos_id)
        total, spans = batch_loss(model, batch, config.lambda_)
        value = total.item()
        if not math.isfinite(value):
            raise TrainingDivergedError(step, value)
        (total / len(group)).backward()
        total_value += value / len(group)
        ga_values.extend(spans.goal_action.detach().tolist())
        obs_values.extend(
            item
            for item, present in zip(
                spans.observation.detach().tolist(),
                spans.has_observation.tolist(),
                strict=True,
            )
            if present
        )
    torch.nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip)
    optimizer.step()
    return TrainingMetrics(
        step=step,
        epoch=epoch,
        loss=total_value,
        loss_goal_action=statistics.fmean(ga_values),
        loss_observation=statistics.fmean(obs_values) if obs_values else None,
    )
