import json
import logging
import random
from dataclasses import asdict
from pathlib import Path

from .codec import Vocabulary
from .config import PathsConfig, RunConfig
from .data import (
    DatasetManifest,
    Trajectory,
    TrajectoryStore,
    dataset_stats,
    generate_dataset,
    write_stats,
)
from .decoding import DecodePolicy
from .engine import GameSpec
from .errors import DatasetNotFoundError
from .evaluation import (
    AblationBundle,
    EpisodeStore,
    EvalReport,
    ModelAgent,
    evaluate,
    il_baseline,
    open_trace,
    random_baseline,
    run_ablation,
    walkthrough_only,
    write_report,
)
from .goals import GoalStrategy
from .model import (
    FINAL_CHECKPOINT,
    Checkpoint,
    TrainingRun,
    TrajectoryPairs,
    span_report,
    train,
)
from .seeding import derive_seed, seed_everything

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

logger = logging.getLogger("ldt.handler")


def configure_logging(level: str | int = logging.INFO) -> None:
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


class PipelineHandler:
    """Runs the lab stages against one RunConfig, logging each stage."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.store = TrajectoryStore(config.paths.dataset_dir)

    @property
    def paths(self) -> PathsConfig:
        return self.config.paths

    def games(self) -> list[GameSpec]:
        return self.config.games()

    def max_scores(self) -> dict[str, int]:
        return {game.name: game.max_score for game in self.games()}

    def gen_data(self) -> DatasetManifest:
        config = self.config
        logger.info("Starting data generation into %s", self.store.root)
        _, manifest = generate_dataset(
            self.games(),
            config.data.fractions,
            config.data.repeats,
            config.data.seeds,
            config.data.random_steps,
            store=self.store,
            master_seed=config.master_seed,
            jobs=config.jobs,
        )
        self.stats()
        logger.info("Data generation completed: %s trajectories", manifest.trajectory_count)
        return manifest

    def stats(self) -> Path:
        trajectories = self.store.read()
        out_dir = self.paths.report_dir / "dataset"
        write_stats(dataset_stats(trajectories, self.max_scores()), out_dir)
        logger.info("Dataset statistics written to %s", out_dir)
        return out_dir

    def vocabulary(self) -> Vocabulary:
        path = self.paths.vocab_path
        vocab = Vocabulary.from_games(self.games())
        if path.exists() and Vocabulary.load(path).version == vocab.version:
            return vocab
        vocab.save(path)
        logger.info("Vocabulary of %s tokens (%s) saved to %s", len(vocab), vocab.version, path)
        return vocab

    def _initial_checkpoint(self, vocab: Vocabulary) -> Checkpoint:
        config = self.config
        model_config = config.model.model_copy(
            update={
                "vocab_size": len(vocab),
                "init_seed": derive_seed(config.master_seed, "init", config.model.init_seed),
            }
        )
        return Checkpoint.initialize(model_config, vocab.version)

    def _train_series(
        self,
        trajectories: list[Trajectory],
        strategy: GoalStrategy,
        lambda_: float,
        directory: Path,
    ) -> TrainingRun:
        config = self.config
        vocab = self.vocabulary()
        seed_everything(derive_seed(config.master_seed, "torch"))
        checkpoint = self._initial_checkpoint(vocab)
        train_config = config.train.model_copy(
            update={
                "strategy": strategy,
                "lambda_": lambda_,
                "shuffle_seed": derive_seed(
                    config.master_seed, "shuffle", config.train.shuffle_seed
                ),
            }
        )
        data = TrajectoryPairs(
            trajectories=trajectories,
            max_scores=self.max_scores(),
            vocab=vocab,
            strategy=strategy,
            model_config=checkpoint.config,
            samples_per_trajectory=train_config.samples_per_trajectory,
        )
        for stale in directory.glob("*.pt"):
            stale.unlink()
        logger.info(
            "Training %s lambda=%s on %s trajectories into %s",
            strategy.value, lambda_, len(trajectories), directory,
        )
        run = train(
            checkpoint,
            data,
            train_config,
            vocab,
            checkpoint_dir=directory,
            metrics_path=directory / "metrics.jsonl",
        )
        sample = data.epoch_pairs(random.Random(derive_seed(config.master_seed, "span-report")))
        spans = span_report(run.checkpoint, sample, vocab)
        (directory / "span_report.json").write_text(
            json.dumps(asdict(spans), indent=1) + "\n", encoding="utf-8"
        )
        logger.info(
            "Span losses %s: goal+action %.4f, observation %.4f (stderr %.4f) over %s pairs",
            directory.name, spans.goal_action, spans.observation, spans.observation_stderr,
            spans.pairs,
        )
        return run

    def _trajectories(self) -> list[Trajectory]:
        if not self.store.exists():
            raise DatasetNotFoundError(
                f"no dataset at {self.store.root}; run `ldt gen-data` first"
            )
        return self.store.read()

    def train(
        self, strategies: list[GoalStrategy], lambdas: list[float]
    ) -> dict[tuple[GoalStrategy, float], Path]:
        trajectories = self._trajectories()
        series: dict[tuple[GoalStrategy, float], Path] = {}
        for strategy in strategies:
            for lambda_ in lambdas:
                directory = self.paths.series_dir(strategy, lambda_)
                run = self._train_series(trajectories, strategy, lambda_, directory)
                logger.info(
                    "Series %s finished: final loss %.4f, %s checkpoints",
                    directory.name, run.final_loss, len(run.saved),
                )
                series[(strategy, lambda_)] = directory
        return series

    def train_il(self) -> Path:
        trajectories = walkthrough_only(self._trajectories())
        directory = self.paths.il_dir
        self._train_series(trajectories, GoalStrategy.RTG, self.config.train.lambda_, directory)
        return directory

    def evaluate(self, checkpoint_path: Path, policy: DecodePolicy) -> EvalReport:
        checkpoint = Checkpoint.load(checkpoint_path)
        vocab = Vocabulary.load(self.paths.vocab_path)
        label = f"{checkpoint_path.parent.name}/{checkpoint_path.stem}/{policy.label}"
        out_dir = self.paths.report_dir / "eval"
        trace = open_trace(out_dir / "decode_traces" / f"{label.replace('/', '_')}.jsonl")
        try:
            agent = ModelAgent(checkpoint, vocab, policy, trace=trace)
            report = evaluate(
                agent,
                self.config.eval_games(),
                self.config.eval.seeds,
                label=label,
                jobs=self.config.jobs,
            )
        finally:
            if trace is not None:
                trace.close()
        episode_store = EpisodeStore(self.paths.report_dir)
        try:
            path = write_report(report, out_dir, store=episode_store)
        finally:
            episode_store.close()
        logger.info("Evaluation report written to %s", path)
        return report

    def report(self) -> AblationBundle:
        config = self.config
        games = config.eval_games()
        seeds = config.eval.seeds
        vocab = Vocabulary.load(self.paths.vocab_path)
        series = {
            (strategy, lambda_): self.paths.series_dir(strategy, lambda_)
            for strategy in config.ablation.strategies
            for lambda_ in config.ablation.lambdas
        }
        sweep_series = (config.ablation.sweep_strategy, config.ablation.lambdas[0])

        baseline_reports: list[EvalReport] = []
        if config.ablation.include_random:
            baseline_reports.append(
                random_baseline(games, seeds, config.master_seed, jobs=config.jobs)
            )
        if config.ablation.include_il:
            il_checkpoint = Checkpoint.load(self.paths.il_dir / FINAL_CHECKPOINT)
            policy = DecodePolicy.parse(f"tilt:{config.eval.strategy_alpha:g}")
            baseline_reports.append(
                il_baseline(il_checkpoint, vocab, games, seeds, policy, jobs=config.jobs)
            )

        episode_store = EpisodeStore(self.paths.report_dir)
        try:
            bundle = run_ablation(
                games,
                seeds,
                vocab,
                series,
                sweep_series=sweep_series,
                alphas=config.eval.alphas,
                strategy_alpha=config.eval.strategy_alpha,
                baseline_reports=baseline_reports,
                store=episode_store,
                jobs=config.jobs,
            )
        finally:
            episode_store.close()
        written = bundle.write(self.paths.report_dir / "ablation")
        for _, row in bundle.findings.iterrows():
            logger.info(
                "Finding %s = %s (%s): %s", row.finding, row.value, row.threshold, row.status
            )
        logger.info("Ablation bundle written: %s", ", ".join(path.name for path in written))
        return bundle

    def reproduce(self) -> AblationBundle:
        config = self.config
        config.paths.ensure()
        logger.info("Stage 1/4: data generation")
        self.gen_data()
        logger.info(
            "Stage 2/4: training %s strategies x %s lambdas",
            len(config.ablation.strategies),
            len(config.ablation.lambdas),
        )
        self.train(config.ablation.strategies, config.ablation.lambdas)
        if config.ablation.include_il:
            logger.info("Stage 3/4: imitation-learning baseline")
            self.train_il()
        else:
            logger.info("Stage 3/4: imitation-learning baseline skipped")
        logger.info("Stage 4/4: evaluation and reports")
        bundle = self.report()
        logger.info("Reproduction completed")
        return bundle
