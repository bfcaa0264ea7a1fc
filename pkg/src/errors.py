from __future__ import annotations


class LabError(RuntimeError):
    code = "LAB_ERROR"


class GameSpecError(LabError, ValueError):
    code = "GAME_SPEC_INVALID"

    def __init__(self, message: str, location: str | None = None) -> None:
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class EpisodeFinishedError(LabError):
    code = "EPISODE_FINISHED"


class GoalValueError(LabError, ValueError):
    code = "GOAL_VALUE_INVALID"


class SplitIndexError(LabError, IndexError):
    code = "SPLIT_OUT_OF_RANGE"


class SequenceTooLongError(LabError, ValueError):
    code = "SEQUENCE_TOO_LONG"


class DecodeError(LabError):
    code = "INVALID_SEQUENCE"


class TrainingDivergedError(LabError):
    code = "NON_FINITE_LOSS"

    def __init__(self, step: int, loss: float) -> None:
        super().__init__(f"Loss became non-finite ({loss}) at step {step}")
        self.step = step
        self.loss = loss


class CheckpointNotFoundError(LabError, FileNotFoundError):
    code = "CHECKPOINT_NOT_FOUND"


class DatasetNotFoundError(LabError, FileNotFoundError):
    code = "DATASET_NOT_FOUND"


class ConfigError(LabError, ValueError):
    code = "CONFIG_INVALID"


class VocabularyNotFoundError(LabError, FileNotFoundError):
    code = "VOCABULARY_NOT_FOUND"
