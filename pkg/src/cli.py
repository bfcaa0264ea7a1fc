"""Command-line entry point: ``ldt gen-data|train|eval|report|reproduce|stats``."""

from __future__ import annotations

import functools
import logging
import os
from collections.abc import Callable
from pathlib import Path

import click

from .config import RunConfig
from .decoding import DecodePolicy
from .errors import LabError
from .goals import GoalStrategy
from .handler import PipelineHandler, configure_logging

STRATEGY_CHOICE = click.Choice([item.value for item in GoalStrategy], case_sensitive=False)


class LabGroup(click.Group):
    """Turns domain errors into a single ``error=<CODE> <message>`` line and exit status 2."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except LabError as exc:
            click.echo(f"error={exc.code} {exc}", err=True)
            ctx.exit(2)


def common_options(command: Callable) -> Callable:
    @click.option(
        "--config",
        "config_path",
        type=click.Path(dir_okay=False, path_type=Path),
        default=None,
        help="YAML run config (defaults apply when omitted).",
    )
    @click.option("--seed", type=int, default=None, help="Override master_seed.")
    @click.option("--jobs", type=click.IntRange(min=1), default=None, help="Worker processes.")
    @click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
    @functools.wraps(command)
    def wrapper(
        config_path: Path | None, seed: int | None, jobs: int | None, verbose: bool, **kwargs
    ):
        config = RunConfig.from_file(config_path).with_overrides(master_seed=seed, jobs=jobs)
        level = "DEBUG" if verbose else os.environ.get("LDT_LOG_LEVEL", config.log_level)
        configure_logging(level.upper())
        logging.getLogger("ldt.handler").debug("Effective config: %s", config.model_dump_json())
        return command(PipelineHandler(config), **kwargs)

    return wrapper


@click.group(cls=LabGroup)
def main():
    """Desk-scale language decision transformer lab."""


@main.command("gen-data")
@common_options
def gen_data(handler: PipelineHandler):
    """Generate perturbed-walkthrough trajectories and dataset statistics."""
    handler.config.paths.ensure()
    manifest = handler.gen_data()
    for game, count in manifest.trajectories_per_game.items():
        click.echo(f"{game}: {count} trajectories")
    click.echo(f"{manifest.trajectory_count} trajectories in {handler.store.root}")


@main.command()
@common_options
def stats(handler: PipelineHandler):
    """Recompute score and length histograms of the stored dataset."""
    click.echo(f"Statistics written to {handler.stats()}")


@main.command()
@click.option(
    "--strategy",
    "strategies",
    type=STRATEGY_CHOICE,
    multiple=True,
    help="Goal strategy; repeat for several series (default: config train.strategy).",
)
@click.option(
    "--lambda",
    "lambdas",
    type=click.FloatRange(min=0.0),
    multiple=True,
    help="Observation-loss weight; repeatable (default: config train.lambda).",
)
@click.option("--il", is_flag=True, help="Train the walkthrough-only imitation baseline instead.")
@common_options
def train(
    handler: PipelineHandler, strategies: tuple[str, ...], lambdas: tuple[float, ...], il: bool
):
    """Train one checkpoint series per (strategy, lambda)."""
    handler.config.paths.ensure()
    if il:
        click.echo(f"IL checkpoints in {handler.train_il()}")
        return
    chosen = [GoalStrategy.parse(item) for item in strategies] or [handler.config.train.strategy]
    series = handler.train(chosen, list(lambdas) or [handler.config.train.lambda_])
    for (strategy, lambda_), directory in series.items():
        click.echo(f"{strategy.value} lambda={lambda_:g}: {directory}")


@main.command("eval")
@click.option(
    "--checkpoint",
    "checkpoint_path",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Checkpoint file to evaluate.",
)
@click.option(
    "--policy",
    "policies",
    multiple=True,
    help="Decode policy such as tilt:10, optimal, fixed:100 (default: config eval.policies).",
)
@common_options
def eval_command(handler: PipelineHandler, checkpoint_path: Path, policies: tuple[str, ...]):
    """Roll out a checkpoint on every evaluation game and seed."""
    for text in policies or handler.config.eval.policies:
        try:
            policy = DecodePolicy.parse(text)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--policy") from exc
        report = handler.evaluate(checkpoint_path, policy)
        click.echo(report.to_frame().to_string(index=False))


@main.command()
@common_options
def report(handler: PipelineHandler):
    """Tilt sweep, strategy table, lambda table, baselines and findings."""
    bundle = handler.report()
    click.echo(bundle.findings.to_string(index=False))


@main.command()
@common_options
def reproduce(handler: PipelineHandler):
    """gen-data, train every series and the IL baseline, then report."""
    bundle = handler.reproduce()
    click.echo(bundle.findings.to_string(index=False))


if __name__ == "__main__":
    main()
