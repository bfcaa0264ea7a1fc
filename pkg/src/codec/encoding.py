from __future__ import annotations

import logging
from dataclasses import dataclass

from ..errors import SequenceTooLongError
from .serialize import SerializedPair
from .tokens import DELIMITER, GOAL_MARKER
from .vocab import Vocabulary

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class EncodedPair:
    input_ids: list[int]
    output_ids: list[int]
    goal_action_length: int

    @property
    def has_observation(self) -> bool:
        return len(self.output_ids) > self.goal_action_length


def truncate_context(ids: list[int], vocab: Vocabulary, max_tokens: int) -> list[int]:
    """Drop whole (goal, action, placeholder) segments, oldest first, until ``ids`` fits.

    o_0 (everything before the first goal marker) and the last segment, which
    carries the current observation, are always kept.
    """
    if len(ids) <= max_tokens:
        return ids
    marker = vocab.id_of(GOAL_MARKER)
    starts = [index for index, token in enumerate(ids) if token == marker]
    if not starts:
        raise SequenceTooLongError(
            f"context of {len(ids)} tokens has no droppable segments (limit {max_tokens})"
        )
    head = ids[: starts[0]]
    segments = list(zip(starts, [*starts[1:], len(ids)]))
    keep_from = 0
    length = len(ids)
    while length > max_tokens and keep_from < len(segments) - 1:
        begin, end = segments[keep_from]
        length -= end - begin
        keep_from += 1
    if length > max_tokens:
        raise SequenceTooLongError(
            f"context needs {length} tokens after truncation (limit {max_tokens})"
        )
    logger.debug("Dropped %s context segments to fit %s tokens", keep_from, max_tokens)
    return head + ids[segments[keep_from][0] :]


def goal_action_length(output_ids: list[int], vocab: Vocabulary) -> int:
    delimiter = vocab.id_of(DELIMITER)
    seen = 0
    for index, token in enumerate(output_ids):
        if token == delimiter:
            seen += 1
            if seen == 2:
                return index + 1
    return len(output_ids)


def encode_pair(
    pair: SerializedPair, vocab: Vocabulary, max_input_tokens: int, max_output_tokens: int
) -> EncodedPair:
    input_ids = truncate_context(vocab.encode(pair.input_text), vocab, max_input_tokens)
    output_ids = vocab.encode(pair.output_text)
    span = goal_action_length(output_ids, vocab)
    if span > max_output_tokens:
        raise SequenceTooLongError(
            f"goal/action span of {span} tokens exceeds output limit {max_output_tokens}"
        )
    return EncodedPair(
        input_ids=input_ids,
        output_ids=output_ids[:max_output_tokens],
        goal_action_length=span,
    )
