"""Goal selection by exponential tilt and action decoding conditioned on the chosen goal."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field

from .codec import Vocabulary, parse_output
from .codec.tokens import ACTION_MARKER, DELIMITER, GOAL_MARKER
from .errors import DecodeError
from .goals import GOAL_MAX, normalize_goal
from .model import Checkpoint

logger = logging.getLogger(__name__)

MIN_GOAL_MASS = 1e-6

_POLICY_RE = re.compile(
    r"^(?P<mode>tilt|optimal|fixed)(?::(?P<value>[0-9.]+))?(?P<constrained>\+constrained)?$"
)


class DecodeMode(StrEnum):
    TILT = "tilt"
    OPTIMAL = "optimal"
    FIXED = "fixed"


class DecodePolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: DecodeMode = DecodeMode.TILT
    alpha: float = Field(default=0.0, ge=0.0)
    initial_goal: float = Field(default=1.0, ge=0.0, le=1.0)
    fixed_goal: int = Field(default=GOAL_MAX, ge=0, le=GOAL_MAX)
    constrained: bool = False

    @classmethod
    def parse(cls, text: str) -> DecodePolicy:
        """``tilt:10``, ``optimal``, ``optimal:0.8``, ``fixed:100``, any of them ``+constrained``."""
        match = _POLICY_RE.match(text.strip().lower())
        if match is None:
            raise ValueError(
                f"cannot parse decode policy {text!r}; expected tilt:<alpha>, "
                "optimal[:<fraction>] or fixed:<goal>"
            )
        mode = DecodeMode(match["mode"])
        value = match["value"]
        constrained = match["constrained"] is not None
        match mode:
            case DecodeMode.TILT:
                return cls(mode=mode, alpha=float(value or 0), constrained=constrained)
            case DecodeMode.OPTIMAL:
                return cls(
                    mode=mode,
                    initial_goal=float(value) if value else 1.0,
                    constrained=constrained,
                )
            case DecodeMode.FIXED:
                if value is None:
                    raise ValueError("fixed policy needs a goal value, e.g. fixed:100")
                return cls(mode=mode, fixed_goal=int(value), constrained=constrained)
        raise ValueError(f"unsupported decode mode {mode!r}")

    @property
    def label(self) -> str:
        match self.mode:
            case DecodeMode.TILT:
                text = f"tilt:{self.alpha:g}"
            case DecodeMode.OPTIMAL:
                text = f"optimal:{self.initial_goal:g}"
            case _:
                text = f"fixed:{self.fixed_goal}"
        return f"{text}+constrained" if self.constrained else text


@dataclass(slots=True, frozen=True)
class GoalDistribution:
    probabilities: np.ndarray
    support_mass: float = 1.0

    @classmethod
    def from_mapping(cls, mapping: dict[int, float]) -> GoalDistribution:
        probabilities = np.zeros(GOAL_MAX + 1, dtype=np.float64)
        for goal, probability in mapping.items():
            probabilities[goal] = probability
        total = probabilities.sum()
        return cls(probabilities=probabilities / total, support_mass=float(total))

    @property
    def mode(self) -> int:
        return tilt_select(self, 0.0)

    @property
    def entropy(self) -> float:
        nonzero = self.probabilities[self.probabilities > 0]
        return float(-(nonzero * np.log(nonzero)).sum())


@dataclass(slots=True)
class DecodeResult:
    goal: int
    action: str
    text: str
    distribution: GoalDistribution | None = None


class DecodeTrace(BaseModel):
    game: str
    seed: int
    step: int
    policy: str
    context_tokens: int
    entropy: float | None = None
    support_mass: float | None = None
    goal: int | None = None
    action: str | None = None
    error: str | None = None


def goal_distribution(
    checkpoint: Checkpoint, input_ids: list[int], vocab: Vocabulary
) -> GoalDistribution:
    probabilities = checkpoint.next_token_distribution(
        input_ids, [vocab.id_of(GOAL_MARKER)], vocab.bos_id
    )
    goal_mass = probabilities[vocab.goal_ids].numpy()
    support = float(goal_mass.sum())
    if support < MIN_GOAL_MASS:
        raise DecodeError(f"goal-token mass {support:.2e} below {MIN_GOAL_MASS}")
    return GoalDistribution(probabilities=goal_mass / support, support_mass=support)


def tilt_select(distribution: GoalDistribution, alpha: float) -> int:
    """argmax over g of log P(g) + alpha * g / 100, zero-mass goals excluded, ties to larger g."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    probabilities = distribution.probabilities
    goals = np.arange(len(probabilities))
    with np.errstate(divide="ignore"):
        scores = np.where(
            probabilities > 0,
            np.log(probabilities) + alpha * goals / GOAL_MAX,
            -np.inf,
        )
    best = scores.max()
    if not np.isfinite(best):
        raise DecodeError("goal distribution has no support")
    return int(np.flatnonzero(scores == best).max())


def optimal_goal_token(running_goal: Fraction | float, max_score: int) -> int:
    """Render a running goal fraction as its goal token value, e.g. 0.75 of 50 -> 75."""
    return normalize_goal(Fraction(running_goal) * max_score, max_score)


class _Decoder:
    def __init__(self, checkpoint: Checkpoint, context_ids: list[int], vocab: Vocabulary):
        self.model = checkpoint.model
        self.model.eval()
        self.vocab = vocab
        self.limit = checkpoint.config.max_output_tokens
        self.memory = self.model.encode(torch.tensor([context_ids], dtype=torch.long))

    def log_probs(self, prefix: list[int]) -> torch.Tensor:
        target = torch.tensor([[self.vocab.bos_id, *prefix]], dtype=torch.long)
        logits = self.model.decode(self.memory, target)[0]
        return torch.log_softmax(logits.double(), dim=-1)

    def greedy(self, prefix: list[int]) -> list[int]:
        delimiter = self.vocab.id_of(DELIMITER)
        generated: list[int] = []
        while generated.count(delimiter) < 2:
            if 1 + len(prefix) + len(generated) > self.limit:
                raise DecodeError(
                    f"no closing delimiter within {self.limit} output tokens"
                )
            generated.append(int(self.log_probs(prefix + generated)[-1].argmax()))
        return generated

    def constrained(self, prefix: list[int], candidates: list[str]) -> list[int]:
        best: list[int] | None = None
        best_score = -np.inf
        for candidate in candidates:
            continuation = self.vocab.encode(
                f"{DELIMITER} {ACTION_MARKER} {candidate} {DELIMITER}"
            )
            if len(prefix) + len(continuation) > self.limit:
                continue
            scores = self.log_probs(prefix + continuation[:-1])
            positions = torch.arange(len(prefix), len(prefix) + len(continuation))
            score = scores[positions, torch.tensor(continuation)].sum().item()
            if score > best_score:
                best, best_score = continuation, score
        if best is None:
            raise DecodeError("no candidate action fits the output length limit")
        return best


@torch.no_grad()
def decode_step(
    checkpoint: Checkpoint,
    context_ids: list[int],
    policy: DecodePolicy,
    vocab: Vocabulary,
    *,
    goal_override: int | None = None,
    candidates: list[str] | None = None,
) -> DecodeResult:
    """Pick g_t per ``policy``, force-feed its goal token, then decode the action.

    ``goal_override`` carries the externally maintained goal for optimal mode.
    ``candidates`` is required when the policy is constrained.
    """
    distribution: GoalDistribution | None = None
    match policy.mode:
        case DecodeMode.TILT:
            distribution = goal_distribution(checkpoint, context_ids, vocab)
            goal = tilt_select(distribution, policy.alpha)
        case DecodeMode.FIXED:
            goal = policy.fixed_goal
        case DecodeMode.OPTIMAL:
            if goal_override is None:
                raise ValueError("optimal decoding needs the running goal as goal_override")
            goal = goal_override

    prefix = [vocab.id_of(GOAL_MARKER), vocab.goal_id(goal)]
    decoder = _Decoder(checkpoint, context_ids, vocab)
    if policy.constrained:
        if not candidates:
            raise DecodeError("constrained decoding without candidate actions")
        generated = decoder.constrained(prefix, candidates)
    else:
        generated = decoder.greedy(prefix)

    text = vocab.decode(prefix + generated)
    parsed = parse_output(text)
    if parsed.goal != goal or parsed.action is None:
        raise DecodeError(f"cannot parse decoded output {text!r}")
    return DecodeResult(goal=goal, action=parsed.action, text=text, distribution=distribution)
