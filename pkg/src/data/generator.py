from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..engine import EngineState, GameSpec, Observation, reset, step
from ..seeding import derive_seed
from .schemas import WALKTHROUGH_FRACTION, DatasetManifest, Step, Trajectory
from .store import TrajectoryStore

logger = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class GenerationTask:
    game: GameSpec
    seed: int
    fraction: int
    repeat: int
    random_steps: int
    rng_seed: int


def walkthrough_prefix_length(fraction: int, walkthrough_length: int) -> int:
    return fraction * walkthrough_length // 100


class _Recorder:
    def __init__(self, game: GameSpec, seed: int) -> None:
        self.state: EngineState
        self.observation: Observation
        self.state, self.observation = reset(game, seed)
        self.steps: list[Step] = []

    @property
    def live(self) -> bool:
        return not self.state.done and bool(self.observation.candidate_actions)

    def play(self, action: str) -> None:
        before = self.observation
        self.state, self.observation, reward, _ = step(self.state, action)
        self.steps.append(Step(observation=before, action=action, reward=reward))

    def finish(self, fraction: int, repeat: int) -> Trajectory:
        return Trajectory(
            game=self.state.game.name,
            seed=self.state.seed,
            walkthrough_fraction=fraction,
            repeat=repeat,
            steps=self.steps,
            final_score=self.state.cumulative_score,
            terminal=self.state.done,
        )


def generate_perturbed(
    game: GameSpec,
    seed: int,
    fraction: int,
    random_steps: int,
    rng: random.Random,
    *,
    repeat: int = 0,
) -> Trajectory:
    if not 0 <= fraction < WALKTHROUGH_FRACTION:
        raise ValueError(f"walkthrough fraction must be in [0, 100), got {fraction}")
    if random_steps < 0:
        raise ValueError(f"random_steps must be non-negative, got {random_steps}")

    recorder = _Recorder(game, seed)
    prefix = walkthrough_prefix_length(fraction, len(game.walkthrough))
    for action in game.walkthrough[:prefix]:
        if not recorder.live:
            break
        recorder.play(action)

    for _ in range(random_steps):
        if not recorder.live:
            break
        recorder.play(rng.choice(recorder.observation.candidate_actions))

    return recorder.finish(fraction, repeat)


def generate_walkthrough(game: GameSpec, seed: int) -> Trajectory:
    recorder = _Recorder(game, seed)
    for action in game.walkthrough:
        if not recorder.live:
            break
        recorder.play(action)
    return recorder.finish(WALKTHROUGH_FRACTION, 0)


def _run_task(task: GenerationTask) -> Trajectory:
    if task.fraction == WALKTHROUGH_FRACTION:
        return generate_walkthrough(task.game, task.seed)
    return generate_perturbed(
        task.game,
        task.seed,
        task.fraction,
        task.random_steps,
        random.Random(task.rng_seed),
        repeat=task.repeat,
    )


def plan_tasks(
    games: list[GameSpec],
    fractions: list[int],
    repeats: int,
    seeds: list[int],
    random_steps: int,
    master_seed: int,
) -> list[GenerationTask]:
    tasks: list[GenerationTask] = []
    for game in games:
        for seed in seeds:
            for fraction in fractions:
                for repeat in range(repeats):
                    tasks.append(
                        GenerationTask(
                            game=game,
                            seed=seed,
                            fraction=fraction,
                            repeat=repeat,
                            random_steps=random_steps,
                            rng_seed=derive_seed(master_seed, game.name, seed, fraction, repeat),
                        )
                    )
            tasks.append(
                GenerationTask(game, seed, WALKTHROUGH_FRACTION, 0, 0, rng_seed=0)
            )
    return tasks


def generate_dataset(
    games: list[GameSpec],
    fractions: list[int],
    repeats: int,
    seeds: list[int],
    random_steps: int,
    *,
    store: TrajectoryStore,
    master_seed: int = 0,
    jobs: int = 1,
) -> tuple[list[Trajectory], DatasetManifest]:
    if not fractions:
        raise ValueError("at least one walkthrough fraction is required")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")

    tasks = plan_tasks(games, fractions, repeats, seeds, random_steps, master_seed)
    logger.info(
        "Generating %s trajectories for %s games (jobs=%s)", len(tasks), len(games), jobs
    )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            trajectories = list(executor.map(_run_task, tasks, chunksize=8))
    else:
        trajectories = [_run_task(task) for task in tasks]
    trajectories.sort(key=Trajectory.sort_key)

    per_game: dict[str, int] = {}
    for trajectory in trajectories:
        per_game[trajectory.game] = per_game.get(trajectory.game, 0) + 1
    manifest = DatasetManifest(
        games=[game.name for game in games],
        fractions=list(fractions),
        repeats_per_fraction=repeats,
        seeds=list(seeds),
        random_steps=random_steps,
        master_seed=master_seed,
        trajectories_per_game=per_game,
    )
    store.write(trajectories, manifest)
    logger.info("Stored %s trajectories under %s", manifest.trajectory_count, store.root)
    return trajectories, manifest
