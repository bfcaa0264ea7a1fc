from .ablation import (
    AblationBundle,
    findings,
    lambda_table,
    run_ablation,
    series_checkpoints,
    strategy_table,
    tilt_sweep,
)
from .agents import Agent, Decision, ModelAgent, RandomAgent, ScriptedAgent, Turn, open_trace
from .baselines import baselines, il_baseline, random_baseline, walkthrough_only
from .report import EpisodeStore, EvalReport, GameSummary, evaluate, write_report
from .rollout import Episode, TerminationReason, rollout

__all__ = [
    "AblationBundle",
    "Agent",
    "Decision",
    "Episode",
    "EpisodeStore",
    "EvalReport",
    "GameSummary",
    "ModelAgent",
    "RandomAgent",
    "ScriptedAgent",
    "TerminationReason",
    "Turn",
    "baselines",
    "evaluate",
    "findings",
    "il_baseline",
    "lambda_table",
    "open_trace",
    "random_baseline",
    "rollout",
    "run_ablation",
    "series_checkpoints",
    "strategy_table",
    "tilt_sweep",
    "walkthrough_only",
    "write_report",
]
