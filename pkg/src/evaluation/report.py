from __future__ import annotations

import logging
import multiprocessing
import statistics
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import pandas as pd
import torch
from pydantic import BaseModel, Field

from ..data import write_trajectories
from ..decoding import DecodeTrace
from ..engine import GameSpec
from .agents import Agent
from .db.lifecycle import close_db, init_db, session_scope
from .db.repository import add_episode, list_episodes, list_run_labels, replace_run
from .db.session import create_db_engine, create_session_factory
from .rollout import Episode, rollout

logger = logging.getLogger(__name__)

NORMALIZED_ROW = "normalized_average"


class GameSummary(BaseModel):
    game: str
    max_score: int
    avg: float
    stdev: float
    best: int
    episodes: int

    @property
    def normalized(self) -> float:
        return self.avg / self.max_score

    @property
    def normalized_best(self) -> float:
        return self.best / self.max_score


class EvalReport(BaseModel):
    label: str
    episodes: list[Episode] = Field(default_factory=list)
    games: list[GameSummary] = Field(default_factory=list)
    normalized_average: float = 0.0

    @classmethod
    def from_episodes(cls, label: str, episodes: Iterable[Episode]) -> EvalReport:
        """Per-game avg, population stdev and best; overall mean of avg / max_score."""
        episodes = sorted(episodes, key=lambda item: (item.game, item.seed))
        if not episodes:
            raise ValueError(f"report {label!r} has no episodes")
        by_game: dict[str, list[Episode]] = {}
        for episode in episodes:
            by_game.setdefault(episode.game, []).append(episode)

        games = []
        for game, items in by_game.items():
            scores = [item.score for item in items]
            games.append(
                GameSummary(
                    game=game,
                    max_score=items[0].max_score,
                    avg=statistics.fmean(scores),
                    stdev=statistics.pstdev(scores),
                    best=max(scores),
                    episodes=len(items),
                )
            )
        normalized = statistics.fmean(summary.normalized for summary in games)
        return cls(label=label, episodes=episodes, games=games, normalized_average=normalized)

    @property
    def normalized_best(self) -> float:
        return statistics.fmean(summary.normalized_best for summary in self.games)

    def game(self, name: str) -> GameSummary:
        for summary in self.games:
            if summary.game == name:
                return summary
        raise KeyError(name)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "game": summary.game,
                "max_score": summary.max_score,
                "avg": summary.avg,
                "stdev": summary.stdev,
                "best": summary.best,
                "normalized": summary.normalized,
            }
            for summary in self.games
        ]
        rows.append({"game": NORMALIZED_ROW, "normalized": self.normalized_average})
        return pd.DataFrame(rows)

    def episodes_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "game": item.game,
                    "seed": item.seed,
                    "score": item.score,
                    "max_score": item.max_score,
                    "length": item.length,
                    "reason": item.reason.value,
                }
                for item in self.episodes
            ]
        )


class EpisodeStore:
    """SQLite file of evaluation runs under a report directory."""

    def __init__(self, report_dir: Path) -> None:
        self.report_dir = report_dir
        self.engine = create_db_engine(report_dir)
        self.factory = create_session_factory(self.engine)
        init_db(self.engine)

    def save(self, report: EvalReport, checkpoint: str | None = None) -> None:
        agent = report.episodes[0].agent if report.episodes else ""
        with session_scope(self.factory) as session:
            run = replace_run(session, report.label, agent, checkpoint)
            for episode in report.episodes:
                add_episode(session, run, episode)

    def load(self, label: str) -> EvalReport:
        with session_scope(self.factory) as session:
            episodes = list_episodes(session, label)
        return EvalReport.from_episodes(label, episodes)

    def labels(self) -> list[str]:
        with session_scope(self.factory) as session:
            return list_run_labels(session)

    def close(self) -> None:
        close_db(self.engine)


_worker_agent: Agent | None = None


def _init_worker(agent: Agent) -> None:
    global _worker_agent
    torch.set_num_threads(1)
    _worker_agent = agent


def _run_cell(cell: tuple[GameSpec, int]) -> tuple[Episode, list[DecodeTrace]]:
    if _worker_agent is None:
        raise RuntimeError("evaluation worker started without an agent")
    game, seed = cell
    episode = rollout(_worker_agent, game, seed)
    return episode, _worker_agent.episode_records()


def evaluate(
    agent: Agent,
    games: list[GameSpec],
    seeds: list[int],
    *,
    label: str | None = None,
    jobs: int = 1,
) -> EvalReport:
    """Roll out every (game, seed) cell; ``jobs`` > 1 spreads cells over worker processes.

    Episodes are deterministic per cell, so the report and the decode trace do
    not depend on ``jobs``.
    """
    if not seeds:
        raise ValueError("evaluation needs at least one seed")
    cells = [(game, seed) for game in games for seed in seeds]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(
            max_workers=min(jobs, len(cells)),
            mp_context=multiprocessing.get_context("spawn"),
            initializer=_init_worker,
            initargs=(agent.detached(),),
        ) as executor:
            results = list(executor.map(_run_cell, cells))
        episodes = []
        for episode, records in results:
            agent.absorb(records)
            episodes.append(episode)
    else:
        episodes = [rollout(agent, game, seed) for game, seed in cells]
    report = EvalReport.from_episodes(label or agent.name, episodes)
    logger.info(
        "Evaluated %s on %s games x %s seeds: normalized average %.3f",
        report.label, len(games), len(seeds), report.normalized_average,
    )
    return report


def write_report(report: EvalReport, out_dir: Path, *, store: EpisodeStore | None = None) -> Path:
    """CSV summary, per-episode table and the episode traces as trajectories."""
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = report.label.replace(":", "_").replace("/", "_").replace("+", "_")
    summary_path = out_dir / f"{stem}.csv"
    report.to_frame().to_csv(summary_path, index=False)
    report.episodes_frame().to_csv(out_dir / f"{stem}_episodes.csv", index=False)
    write_trajectories(
        out_dir / "traces" / f"{stem}.jsonl", (item.trajectory for item in report.episodes)
    )
    if store is not None:
        store.save(report)
    return summary_path
