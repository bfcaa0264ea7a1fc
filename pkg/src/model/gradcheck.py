"""Finite-difference check of the span-weighted loss gradient."""

from __future__ import annotations

import copy
import logging
import random
from dataclasses import dataclass

import torch

from ..codec import EncodedPair, Vocabulary
from .checkpoint import Checkpoint
from .network import LanguageDecisionModel
from .objective import batch_loss, collate

logger = logging.getLogger(__name__)

MIN_CHECKED = 100
DENOMINATOR_FLOOR = 1e-5


@dataclass(slots=True)
class GradientCheckResult:
    max_relative_error: float
    checked: int
    worst_parameter: str


def _double_model(checkpoint: Checkpoint) -> LanguageDecisionModel:
    model = copy.deepcopy(checkpoint.model).double()
    # train mode keeps the decomposed attention path in both passes; dropout is off
    model.train()
    return model


def parameter_gradients(
    checkpoint: Checkpoint, pair: EncodedPair, vocab: Vocabulary, lambda_: float
) -> dict[str, torch.Tensor]:
    model = _double_model(checkpoint)
    batch = collate([pair], vocab.pad_id, vocab.bos_id)
    total, _ = batch_loss(model, batch, lambda_)
    total.backward()
    return {
        name: (param.grad.detach().clone() if param.grad is not None else torch.zeros_like(param))
        for name, param in model.named_parameters()
    }


def gradient_check(
    checkpoint: Checkpoint,
    pair: EncodedPair,
    vocab: Vocabulary,
    *,
    lambda_: float = 0.5,
    samples: int = 128,
    step_size: float = 1e-4,
    seed: int = 0,
) -> GradientCheckResult:
    if samples < MIN_CHECKED:
        raise ValueError(f"check at least {MIN_CHECKED} parameters, got {samples}")
    model = _double_model(checkpoint)
    batch = collate([pair], vocab.pad_id, vocab.bos_id)
    total, _ = batch_loss(model, batch, lambda_)
    total.backward()

    named = list(model.named_parameters())
    sizes = [param.numel() for _, param in named]
    population = sum(sizes)
    rng = random.Random(seed)
    picks = rng.sample(range(population), min(samples, population))

    worst = 0.0
    worst_name = ""
    with torch.no_grad():
        for flat_index in picks:
            offset = flat_index
            for (name, param), size in zip(named, sizes, strict=True):
                if offset < size:
                    break
                offset -= size
            flat = param.view(-1)
            analytic = 0.0 if param.grad is None else param.grad.view(-1)[offset].item()
            original = flat[offset].item()
            flat[offset] = original + step_size
            plus, _ = batch_loss(model, batch, lambda_)
            flat[offset] = original - step_size
            minus, _ = batch_loss(model, batch, lambda_)
            flat[offset] = original
            numeric = (plus.item() - minus.item()) / (2 * step_size)
            error = abs(analytic - numeric) / max(
                abs(analytic) + abs(numeric), DENOMINATOR_FLOOR
            )
            if error > worst:
                worst, worst_name = error, f"{name}[{offset}]"

    logger.info(
        "Gradient check over %s parameters: max relative error %.3e (%s)",
        len(picks),
        worst,
        worst_name or "-",
    )
    return GradientCheckResult(
        max_relative_error=worst, checked=len(picks), worst_parameter=worst_name
    )
