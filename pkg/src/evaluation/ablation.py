"""Tilt sweep, goal-strategy table, auxiliary-loss table and the directional findings."""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from ..codec import Vocabulary
from ..decoding import DecodeMode, DecodePolicy
from ..engine import GameSpec
from ..errors import CheckpointNotFoundError
from ..goals import GoalStrategy
from ..model import FINAL_CHECKPOINT, Checkpoint
from .agents import ModelAgent
from .baselines import IL_LABEL, RANDOM_LABEL, baselines
from .report import NORMALIZED_ROW, EpisodeStore, EvalReport, evaluate

logger = logging.getLogger(__name__)

OPTIMAL_COLUMN = "optimal"
PASS = "pass"
FAIL = "fail"
REPORT_ONLY = "report-only"


@dataclass(slots=True)
class AblationBundle:
    tilt_sweep: pd.DataFrame
    strategy_table: pd.DataFrame
    lambda_table: pd.DataFrame
    baselines: pd.DataFrame
    findings: pd.DataFrame
    reports: dict[str, EvalReport] = field(default_factory=dict)

    def write(self, out_dir: Path) -> list[Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name in ("tilt_sweep", "strategy_table", "lambda_table", "baselines", "findings"):
            path = out_dir / f"{name}.csv"
            getattr(self, name).to_csv(path, index=False)
            written.append(path)
        return written


def alpha_column(alpha: float) -> str:
    return f"alpha_{alpha:g}"


def series_checkpoints(directory: Path) -> list[Path]:
    """Periodic checkpoints of one training series in step order, final last."""
    final = directory / FINAL_CHECKPOINT
    if not final.is_file():
        raise CheckpointNotFoundError(f"missing checkpoint {final}")
    return [*sorted(directory.glob("step_*.pt")), final]


def _evaluate_model(
    checkpoint: Checkpoint,
    vocab: Vocabulary,
    policy: DecodePolicy,
    games: list[GameSpec],
    seeds: list[int],
    label: str,
    reports: dict[str, EvalReport],
    jobs: int = 1,
) -> EvalReport:
    agent = ModelAgent(checkpoint, vocab, policy)
    report = evaluate(agent, games, seeds, label=label, jobs=jobs)
    reports[label] = report
    return report


def tilt_sweep(
    checkpoint_paths: list[Path],
    vocab: Vocabulary,
    games: list[GameSpec],
    seeds: list[int],
    alphas: list[float],
    reports: dict[str, EvalReport] | None = None,
    *,
    jobs: int = 1,
) -> pd.DataFrame:
    """Rows are checkpoints, columns the normalized average per alpha plus optimal GC."""
    reports = {} if reports is None else reports
    rows = []
    for path in checkpoint_paths:
        checkpoint = Checkpoint.load(path)
        row: dict[str, object] = {"checkpoint": path.name, "step": checkpoint.step}
        for alpha in alphas:
            label = f"sweep/{path.parent.name}/{path.stem}/tilt:{alpha:g}"
            policy = DecodePolicy(mode=DecodeMode.TILT, alpha=alpha)
            report = _evaluate_model(
                checkpoint, vocab, policy, games, seeds, label, reports, jobs
            )
            row[alpha_column(alpha)] = report.normalized_average
        label = f"sweep/{path.parent.name}/{path.stem}/optimal"
        policy = DecodePolicy(mode=DecodeMode.OPTIMAL)
        report = _evaluate_model(checkpoint, vocab, policy, games, seeds, label, reports, jobs)
        row[OPTIMAL_COLUMN] = report.normalized_average
        rows.append(row)
        logger.info("Tilt sweep row %s: %s", path.name, row)
    return pd.DataFrame(rows)


def strategy_table(reports: dict[GoalStrategy, EvalReport]) -> pd.DataFrame:
    """Per game avg/stdev/best for every strategy, plus a normalized row of avg and best."""
    games = sorted({summary.game for report in reports.values() for summary in report.games})
    rows = []
    for game in games:
        row: dict[str, object] = {"game": game}
        for strategy, report in reports.items():
            summary = report.game(game)
            row[f"{strategy.value}_avg"] = summary.avg
            row[f"{strategy.value}_stdev"] = summary.stdev
            row[f"{strategy.value}_best"] = summary.best
        rows.append(row)
    normalized: dict[str, object] = {"game": NORMALIZED_ROW}
    for strategy, report in reports.items():
        normalized[f"{strategy.value}_avg"] = report.normalized_average
        normalized[f"{strategy.value}_best"] = report.normalized_best
    rows.append(normalized)
    return pd.DataFrame(rows)


def lambda_table(reports: dict[tuple[GoalStrategy, float], EvalReport]) -> pd.DataFrame:
    """Per game and lambda: avg/stdev/best of the raw scores pooled over strategies and seeds.

    The normalized row averages avg / max_score and best / max_score over games.
    """
    lambdas = sorted({lambda_ for _, lambda_ in reports}, reverse=True)
    pooled: dict[float, dict[str, list[int]]] = {lambda_: {} for lambda_ in lambdas}
    max_scores: dict[str, int] = {}
    for (_, lambda_), report in reports.items():
        for episode in report.episodes:
            pooled[lambda_].setdefault(episode.game, []).append(episode.score)
            max_scores[episode.game] = episode.max_score

    games = sorted(max_scores)
    rows = []
    normalized: dict[str, object] = {"game": NORMALIZED_ROW}
    for game in games:
        row: dict[str, object] = {"game": game}
        for lambda_ in lambdas:
            column = f"lambda_{lambda_:g}"
            scores = pooled[lambda_].get(game, [])
            row[f"{column}_avg"] = statistics.fmean(scores) if scores else math.nan
            row[f"{column}_stdev"] = statistics.pstdev(scores) if scores else math.nan
            row[f"{column}_best"] = max(scores) if scores else math.nan
            row[f"{column}_runs"] = len(scores)
        rows.append(row)
    frame = pd.DataFrame(rows)
    for lambda_ in lambdas:
        column = f"lambda_{lambda_:g}"
        scale = frame["game"].map(max_scores)
        normalized[f"{column}_avg"] = (frame[f"{column}_avg"] / scale).mean()
        normalized[f"{column}_best"] = (frame[f"{column}_best"] / scale).mean()
    return pd.concat([frame, pd.DataFrame([normalized])], ignore_index=True)


def _finding(name: str, value: float, threshold: str, status: str) -> dict[str, object]:
    return {"finding": name, "value": value, "threshold": threshold, "status": status}


def _check(ok: bool) -> str:
    return PASS if ok else FAIL


def _mean_over(report: EvalReport, games: list[str]) -> float:
    values = [report.game(game).normalized for game in games]
    return statistics.fmean(values) if values else math.nan


def findings(
    games: list[GameSpec],
    sweep: pd.DataFrame,
    strategy_reports: dict[GoalStrategy, EvalReport],
    lambda_frame: pd.DataFrame,
    *,
    optimal_report: EvalReport | None = None,
    random_report: EvalReport | None = None,
    il_report: EvalReport | None = None,
) -> pd.DataFrame:
    """Directional checks of the desk-scale reproduction, one row each."""
    deterministic = [game.name for game in games if not game.is_stochastic]
    stochastic = [game.name for game in games if game.is_stochastic]
    rows = []

    if optimal_report is not None:
        value = _mean_over(optimal_report, deterministic)
        rows.append(_finding("optimal_gc_deterministic", value, ">= 0.80", _check(value >= 0.80)))
    if random_report is not None:
        value = random_report.normalized_average
        rows.append(_finding("random_baseline", value, "<= 0.20", _check(value <= 0.20)))

    if not sweep.empty:
        final = sweep.iloc[-1]
        if alpha_column(10) in final and alpha_column(0) in final:
            gap = final[alpha_column(10)] - final[alpha_column(0)]
            rows.append(_finding("tilt_alpha10_minus_alpha0", gap, ">= 0.05", _check(gap >= 0.05)))
        if alpha_column(20) in final:
            distance = abs(final[alpha_column(20)] - final[OPTIMAL_COLUMN])
            rows.append(
                _finding(
                    "tilt_alpha20_vs_optimal", distance, "<= 0.10", _check(distance <= 0.10)
                )
            )

    summary = lambda_frame[lambda_frame["game"] == NORMALIZED_ROW]
    if "lambda_0.5_avg" in lambda_frame and "lambda_0_avg" in lambda_frame and not summary.empty:
        gap = float(summary["lambda_0.5_avg"].iloc[0] - summary["lambda_0_avg"].iloc[0])
        status = FAIL if gap < -0.02 else PASS if gap > 0 else REPORT_ONLY
        rows.append(_finding("lambda_0.5_minus_lambda_0", gap, ">= -0.02", status))

    if GoalStrategy.RTG in strategy_reports and len(strategy_reports) > 1:
        dense = max(games, key=lambda game: sum(1 for rule in game.rules if rule.reward > 0))
        rtg = strategy_reports[GoalStrategy.RTG].game(dense.name).avg
        others = max(
            report.game(dense.name).avg
            for strategy, report in strategy_reports.items()
            if strategy is not GoalStrategy.RTG
        )
        rows.append(
            _finding(f"rtg_not_best_on_{dense.name}", others - rtg, "> 0", _check(others > rtg))
        )

    if il_report is not None:
        value = _mean_over(il_report, deterministic)
        rows.append(_finding("il_deterministic", value, "== 1.0", _check(value == 1.0)))
        stochastic_episodes = [
            item for item in il_report.episodes if item.game in stochastic
        ]
        if stochastic_episodes:
            misses = sum(1 for item in stochastic_episodes if item.score < item.max_score)
            rows.append(_finding("il_stochastic_misses", misses, ">= 1", _check(misses >= 1)))

    return pd.DataFrame(rows, columns=["finding", "value", "threshold", "status"])


def run_ablation(
    games: list[GameSpec],
    seeds: list[int],
    vocab: Vocabulary,
    series: dict[tuple[GoalStrategy, float], Path],
    *,
    sweep_series: tuple[GoalStrategy, float],
    alphas: list[float],
    strategy_alpha: float = 10.0,
    baseline_reports: list[EvalReport] | None = None,
    store: EpisodeStore | None = None,
    jobs: int = 1,
) -> AblationBundle:
    """Evaluate every trained series and assemble the report bundle.

    ``series`` maps (strategy, lambda) to a checkpoint directory; every one must
    hold a final checkpoint.
    """
    for directory in series.values():
        series_checkpoints(directory)
    reports: dict[str, EvalReport] = {}

    sweep_dir = series[sweep_series]
    sweep = tilt_sweep(
        series_checkpoints(sweep_dir), vocab, games, seeds, alphas, reports, jobs=jobs
    )
    optimal_report = reports[f"sweep/{sweep_dir.name}/final/optimal"]

    cell_reports: dict[tuple[GoalStrategy, float], EvalReport] = {}
    policy = DecodePolicy(mode=DecodeMode.TILT, alpha=strategy_alpha)
    for (strategy, lambda_), directory in series.items():
        checkpoint = Checkpoint.load(directory / FINAL_CHECKPOINT)
        label = f"{strategy.value}/lambda{lambda_:g}/{policy.label}"
        cell_reports[(strategy, lambda_)] = _evaluate_model(
            checkpoint, vocab, policy, games, seeds, label, reports, jobs
        )

    table_lambda = sweep_series[1]
    by_strategy = {
        strategy: report
        for (strategy, lambda_), report in cell_reports.items()
        if lambda_ == table_lambda
    }
    strategies = strategy_table(by_strategy)
    lambdas = lambda_table(cell_reports)

    extra = list(baseline_reports or [])
    for report in extra:
        reports[report.label] = report
    model_rows = [cell_reports[sweep_series], optimal_report]
    bundle = AblationBundle(
        tilt_sweep=sweep,
        strategy_table=strategies,
        lambda_table=lambdas,
        baselines=baselines([*model_rows, *extra]),
        findings=findings(
            games,
            sweep,
            by_strategy,
            lambdas,
            optimal_report=optimal_report,
            random_report=next((r for r in extra if r.label == RANDOM_LABEL), None),
            il_report=next((r for r in extra if r.label == IL_LABEL), None),
        ),
        reports=reports,
    )
    if store is not None:
        for report in reports.values():
            store.save(report)
    return bundle
