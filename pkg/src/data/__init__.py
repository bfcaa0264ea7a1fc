from .generator import (
    generate_dataset,
    generate_perturbed,
    generate_walkthrough,
    walkthrough_prefix_length,
)
from .schemas import WALKTHROUGH_FRACTION, DatasetManifest, Step, Trajectory
from .stats import GameStats, dataset_stats, write_stats
from .store import TrajectoryStore, read_trajectories, write_trajectories

__all__ = [
    "DatasetManifest",
    "GameStats",
    "Step",
    "Trajectory",
    "TrajectoryStore",
    "WALKTHROUGH_FRACTION",
    "dataset_stats",
    "generate_dataset",
    "generate_perturbed",
    "generate_walkthrough",
    "read_trajectories",
    "walkthrough_prefix_length",
    "write_stats",
    "write_trajectories",
]
