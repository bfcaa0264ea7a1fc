"""Teacher-forced cross-entropy split into the [goal, action] span and the observation span."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from ..codec import EncodedPair
from .network import LanguageDecisionModel


@dataclass(slots=True)
class Batch:
    input_ids: torch.Tensor
    input_padding: torch.Tensor
    decoder_ids: torch.Tensor
    decoder_padding: torch.Tensor
    targets: torch.Tensor
    goal_action_mask: torch.Tensor
    observation_mask: torch.Tensor

    def __len__(self) -> int:
        return self.input_ids.size(0)


@dataclass(slots=True)
class SpanLosses:
    goal_action: torch.Tensor
    observation: torch.Tensor
    has_observation: torch.Tensor


def collate(pairs: list[EncodedPair], pad_id: int, bos_id: int) -> Batch:
    if not pairs:
        raise ValueError("cannot collate an empty batch")
    for pair in pairs:
        if pair.goal_action_length == 0:
            raise ValueError("pair has an empty goal/action span")

    input_len = max(len(pair.input_ids) for pair in pairs)
    output_len = max(len(pair.output_ids) for pair in pairs)
    size = len(pairs)
    input_ids = torch.full((size, input_len), pad_id, dtype=torch.long)
    targets = torch.full((size, output_len), pad_id, dtype=torch.long)
    decoder_ids = torch.full((size, output_len), pad_id, dtype=torch.long)
    goal_action_mask = torch.zeros((size, output_len), dtype=torch.bool)
    observation_mask = torch.zeros((size, output_len), dtype=torch.bool)
    decoder_padding = torch.ones((size, output_len), dtype=torch.bool)

    for row, pair in enumerate(pairs):
        count = len(pair.output_ids)
        input_ids[row, : len(pair.input_ids)] = torch.tensor(pair.input_ids)
        targets[row, :count] = torch.tensor(pair.output_ids)
        # shifted right behind <bos>
        decoder_ids[row, 0] = bos_id
        if count > 1:
            decoder_ids[row, 1:count] = torch.tensor(pair.output_ids[:-1])
        decoder_padding[row, :count] = False
        goal_action_mask[row, : pair.goal_action_length] = True
        observation_mask[row, pair.goal_action_length : count] = True

    return Batch(
        input_ids=input_ids,
        input_padding=input_ids.eq(pad_id),
        decoder_ids=decoder_ids,
        decoder_padding=decoder_padding,
        targets=targets,
        goal_action_mask=goal_action_mask,
        observation_mask=observation_mask,
    )


def span_losses(model: LanguageDecisionModel, batch: Batch) -> SpanLosses:
    logits = model(
        batch.input_ids, batch.decoder_ids, batch.input_padding, batch.decoder_padding
    )
    token_loss = F.cross_entropy(
        logits.transpose(1, 2), batch.targets, reduction="none"
    )
    ga_mask = batch.goal_action_mask.to(token_loss.dtype)
    obs_mask = batch.observation_mask.to(token_loss.dtype)
    ga_count = ga_mask.sum(dim=1)
    obs_count = obs_mask.sum(dim=1)
    return SpanLosses(
        goal_action=(token_loss * ga_mask).sum(dim=1) / ga_count,
        observation=(token_loss * obs_mask).sum(dim=1) / obs_count.clamp(min=1.0),
        has_observation=obs_count > 0,
    )


def combine(
    goal_action: torch.Tensor,
    observation: torch.Tensor,
    has_observation: torch.Tensor,
    lambda_: float,
) -> torch.Tensor:
    """Per-pair (L1 + lambda * L2) / (1 + lambda); pairs without an observation span use L1."""
    weighted = (goal_action + lambda_ * observation) / (1.0 + lambda_)
    return torch.where(has_observation, weighted, goal_action)


def batch_loss(
    model: LanguageDecisionModel, batch: Batch, lambda_: float
) -> tuple[torch.Tensor, SpanLosses]:
    spans = span_losses(model, batch)
    per_pair = combine(spans.goal_action, spans.observation, spans.has_observation, lambda_)
    return per_pair.mean(), spans
