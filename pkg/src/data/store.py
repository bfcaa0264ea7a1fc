from __future__ import annotations

import logging
from collections.abc import Iterable
from itertools import groupby
from pathlib import Path

from ..errors import DatasetNotFoundError
from .schemas import DatasetManifest, Trajectory

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"


def write_trajectories(path: Path, trajectories: Iterable[Trajectory]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for trajectory in trajectories:
            handle.write(trajectory.model_dump_json())
            handle.write("\n")


def read_trajectories(path: Path) -> list[Trajectory]:
    with path.open(encoding="utf-8") as handle:
        return [Trajectory.model_validate_json(line) for line in handle if line.strip()]


class TrajectoryStore:
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def game_path(self, game: str) -> Path:
        return self.root / f"{game}.jsonl"

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST_FILE

    def exists(self) -> bool:
        return self.manifest_path.exists()

    def write(self, trajectories: list[Trajectory], manifest: DatasetManifest) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        ordered = sorted(trajectories, key=Trajectory.sort_key)
        for game, group in groupby(ordered, key=lambda item: item.game):
            write_trajectories(self.game_path(game), group)
        self.manifest_path.write_text(
            manifest.model_dump_json(indent=2) + "\n", encoding="utf-8"
        )

    def read_manifest(self) -> DatasetManifest:
        if not self.exists():
            raise DatasetNotFoundError(f"no dataset manifest at {self.manifest_path}")
        return DatasetManifest.model_validate_json(
            self.manifest_path.read_text(encoding="utf-8")
        )

    def read(self, games: list[str] | None = None) -> list[Trajectory]:
        manifest = self.read_manifest()
        result: list[Trajectory] = []
        for game in games or manifest.games:
            path = self.game_path(game)
            if not path.exists():
                raise DatasetNotFoundError(f"no trajectories for {game!r} at {path}")
            result.extend(read_trajectories(path))
        logger.debug("Loaded %s trajectories from %s", len(result), self.root)
        return result
