from .encoding import EncodedPair, encode_pair, goal_action_length, truncate_context
from .serialize import (
    ParsedOutput,
    SerializedPair,
    export_pairs,
    parse_output,
    serialize_action,
    serialize_context,
    serialize_goal,
    serialize_observation,
    serialize_pair,
    serialize_target,
)
from .vocab import Vocabulary, corpus_words

__all__ = [
    "EncodedPair",
    "ParsedOutput",
    "SerializedPair",
    "Vocabulary",
    "corpus_words",
    "encode_pair",
    "export_pairs",
    "goal_action_length",
    "parse_output",
    "serialize_action",
    "serialize_context",
    "serialize_goal",
    "serialize_observation",
    "serialize_pair",
    "serialize_target",
    "truncate_context",
]
