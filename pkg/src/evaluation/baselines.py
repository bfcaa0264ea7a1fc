from __future__ import annotations

import logging

import pandas as pd

from ..codec import Vocabulary
from ..data import WALKTHROUGH_FRACTION, Trajectory
from ..decoding import DecodePolicy
from ..engine import GameSpec
from ..model import Checkpoint
from .agents import ModelAgent, RandomAgent
from .report import NORMALIZED_ROW, EvalReport, evaluate

logger = logging.getLogger(__name__)

RANDOM_LABEL = "baseline/random"
IL_LABEL = "baseline/IL"


def walkthrough_only(trajectories: list[Trajectory]) -> list[Trajectory]:
    """Imitation-learning data: the pure walkthroughs, every other trajectory dropped."""
    return [
        item for item in trajectories if item.walkthrough_fraction == WALKTHROUGH_FRACTION
    ]


def random_baseline(
    games: list[GameSpec], seeds: list[int], master_seed: int = 0, *, jobs: int = 1
) -> EvalReport:
    agent = RandomAgent(master_seed=master_seed)
    return evaluate(agent, games, seeds, label=RANDOM_LABEL, jobs=jobs)


def il_baseline(
    checkpoint: Checkpoint,
    vocab: Vocabulary,
    games: list[GameSpec],
    seeds: list[int],
    policy: DecodePolicy,
    *,
    jobs: int = 1,
) -> EvalReport:
    agent = ModelAgent(checkpoint, vocab, policy, name=f"IL:{policy.label}")
    return evaluate(agent, games, seeds, label=IL_LABEL, jobs=jobs)


def baselines(reports: list[EvalReport]) -> pd.DataFrame:
    """One row per agent: normalized average score per game and overall."""
    rows = []
    for report in reports:
        row: dict[str, object] = {"agent": report.label}
        for summary in report.games:
            row[summary.game] = summary.normalized
        row[NORMALIZED_ROW] = report.normalized_average
        rows.append(row)
    return pd.DataFrame(rows)
