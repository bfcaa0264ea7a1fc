from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import ConfigError
from .schemas import Trajectory

logger = logging.getLogger(__name__)

SCORE_BINS = 10
LENGTH_BIN_WIDTH = 10


@dataclass(slots=True)
class GameStats:
    game: str
    scores: pd.DataFrame
    lengths: pd.DataFrame
    count: int
    mean_score: float
    max_score: float
    mean_length: float


def _histogram(values: np.ndarray, edges: np.ndarray) -> pd.DataFrame:
    counts, _ = np.histogram(values, bins=edges)
    return pd.DataFrame(
        {
            "bin_low": edges[:-1],
            "bin_high": edges[1:],
            "count": counts,
            "proportion": counts / len(values),
        }
    )


def dataset_stats(
    trajectories: list[Trajectory], max_scores: dict[str, int]
) -> dict[str, GameStats]:
    if not trajectories:
        raise ValueError("cannot compute statistics of an empty trajectory store")

    by_game: dict[str, list[Trajectory]] = {}
    for trajectory in trajectories:
        by_game.setdefault(trajectory.game, []).append(trajectory)

    result: dict[str, GameStats] = {}
    for game, items in sorted(by_game.items()):
        if game not in max_scores:
            raise ConfigError(
                f"game {game!r} in the dataset is not configured; known games: {sorted(max_scores)}"
            )
        scores = np.array([item.final_score / max_scores[game] for item in items])
        lengths = np.array([len(item.steps) for item in items])
        length_top = int(lengths.max()) // LENGTH_BIN_WIDTH * LENGTH_BIN_WIDTH
        length_edges = np.arange(0, length_top + 2 * LENGTH_BIN_WIDTH, LENGTH_BIN_WIDTH)
        result[game] = GameStats(
            game=game,
            scores=_histogram(scores, np.linspace(0.0, 1.0, SCORE_BINS + 1)),
            lengths=_histogram(lengths, length_edges),
            count=len(items),
            mean_score=float(scores.mean()),
            max_score=float(scores.max()),
            mean_length=float(lengths.mean()),
        )
    return result


def write_stats(stats: dict[str, GameStats], out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    for game, item in stats.items():
        item.scores.to_csv(out_dir / f"{game}_scores.csv", index=False)
        item.lengths.to_csv(out_dir / f"{game}_lengths.csv", index=False)
    summary = pd.DataFrame(
        [
            {
                "game": item.game,
                "trajectories": item.count,
                "mean_normalized_score": round(item.mean_score, 6),
                "max_normalized_score": round(item.max_score, 6),
                "mean_length": round(item.mean_length, 3),
            }
            for item in stats.values()
        ]
    )
    path = out_dir / "dataset_summary.csv"
    summary.to_csv(path, index=False)
    logger.info("Wrote dataset statistics for %s games to %s", len(stats), out_dir)
    return path
