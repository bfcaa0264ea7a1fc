from .checkpoint import Checkpoint
from .config import ModelConfig, TrainConfig
from .gradcheck import GradientCheckResult, gradient_check, parameter_gradients
from .network import LanguageDecisionModel, build_model
from .objective import Batch, SpanLosses, batch_loss, collate, combine, span_losses
from .trainer import (
    FINAL_CHECKPOINT,
    FixedPairs,
    SpanReport,
    TrainingMetrics,
    TrainingRun,
    TrajectoryPairs,
    loss,
    span_report,
    train,
)

__all__ = [
    "Batch",
    "Checkpoint",
    "FINAL_CHECKPOINT",
    "FixedPairs",
    "GradientCheckResult",
    "LanguageDecisionModel",
    "ModelConfig",
    "SpanLosses",
    "SpanReport",
    "TrainConfig",
    "TrainingMetrics",
    "TrainingRun",
    "TrajectoryPairs",
    "batch_loss",
    "build_model",
    "collate",
    "combine",
    "gradient_check",
    "loss",
    "parameter_gradients",
    "span_losses",
    "span_report",
    "train",
]
