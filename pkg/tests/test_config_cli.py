from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from src.cli import main
from src.config import RunConfig
from src.errors import ConfigError
from src.goals import GoalStrategy

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _write_config(tmp_path: Path, **sections) -> Path:
    payload = {
        "data": {
            "games": ["gemhunt"],
            "fractions": [0],
            "repeats": 1,
            "seeds": [0],
            "random_steps": 5,
        },
        "paths": {
            "dataset_dir": str(tmp_path / "data"),
            "checkpoint_dir": str(tmp_path / "checkpoints"),
            "report_dir": str(tmp_path / "reports"),
        },
    }
    payload.update(sections)
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(payload), encoding="utf-8")
    return path


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("LDT_LOG_LEVEL", "LDT_MASTER_SEED", "LDT_TRAIN__EPOCHS", "LDT_JOBS"):
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    config = RunConfig.from_file(None)
    assert config.master_seed == 0
    assert config.train.strategy is GoalStrategy.RTG
    assert config.train.lambda_ == 0.5
    assert config.eval.seeds == [100, 101, 102, 103, 104]
    assert not set(config.eval.seeds) & set(config.data.seeds)


@pytest.mark.parametrize("name", ["desk.yaml", "full_protocol.yaml", "smoke.yaml"])
def test_bundled_configs_load(name):
    config = RunConfig.from_file(CONFIG_DIR / name)
    assert config.games()


def test_lambda_alias_in_yaml(tmp_path):
    path = _write_config(tmp_path, train={"lambda": 0.0, "epochs": 3})
    config = RunConfig.from_file(path)
    assert config.train.lambda_ == 0.0
    assert config.train.epochs == 3


def test_environment_overrides_file(tmp_path, monkeypatch):
    path = _write_config(tmp_path, master_seed=4, train={"epochs": 3, "batch_size": 8})
    monkeypatch.setenv("LDT_MASTER_SEED", "9")
    monkeypatch.setenv("LDT_TRAIN__EPOCHS", "7")
    config = RunConfig.from_file(path)
    assert config.master_seed == 9
    assert config.train.epochs == 7
    assert config.train.batch_size == 8


def test_flags_override_everything(tmp_path, monkeypatch):
    monkeypatch.setenv("LDT_MASTER_SEED", "9")
    config = RunConfig.from_file(_write_config(tmp_path)).with_overrides(master_seed=1, jobs=3)
    assert (config.master_seed, config.jobs) == (1, 3)


@pytest.mark.parametrize(
    "sections",
    [
        {"data": {"fractions": [100]}},
        {"model": {"model_width": 30, "attention_heads": 4}},
        {"train": {"learning_rate": "fast"}},
        {"eval": {"seeds": []}},
    ],
)
def test_invalid_config(tmp_path, sections):
    with pytest.raises(ConfigError):
        RunConfig.from_file(_write_config(tmp_path, **sections))


def test_malformed_or_missing_file(tmp_path):
    broken = tmp_path / "broken.yaml"
    broken.write_text("data: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.from_file(broken)
    with pytest.raises(ConfigError):
        RunConfig.from_file(tmp_path / "absent.yaml")


def test_series_directory_names():
    paths = RunConfig.from_file(None).paths
    assert paths.series_dir(GoalStrategy.AVG_RTG, 0.5).name == "AvgRTG_lambda0.5"
    assert paths.series_dir(GoalStrategy.RTG, 0.0).name == "RTG_lambda0"


def test_cli_rejects_unknown_strategy(tmp_path):
    result = CliRunner().invoke(
        main, ["train", "--config", str(_write_config(tmp_path)), "--strategy", "Bogus"]
    )
    assert result.exit_code == 2
    for name in ("RTG", "ImR", "FinS", "AvgRTG"):
        assert name in result.output


def test_cli_missing_checkpoint(tmp_path):
    result = CliRunner().invoke(
        main,
        [
            "eval",
            "--config",
            str(_write_config(tmp_path)),
            "--checkpoint",
            str(tmp_path / "missing.pt"),
            "--policy",
            "tilt:10",
        ],
    )
    assert result.exit_code == 2
    assert "error=CHECKPOINT_NOT_FOUND" in result.output


def test_cli_rejects_bad_policy(tmp_path):
    result = CliRunner().invoke(
        main,
        [
            "eval",
            "--config",
            str(_write_config(tmp_path)),
            "--checkpoint",
            str(tmp_path / "missing.pt"),
            "--policy",
            "greedy",
        ],
    )
    assert result.exit_code == 2
    assert "--policy" in result.output


def test_cli_train_without_dataset(tmp_path):
    result = CliRunner().invoke(main, ["train", "--config", str(_write_config(tmp_path))])
    assert result.exit_code == 2
    assert "error=DATASET_NOT_FOUND" in result.output


def test_cli_gen_data_and_stats(tmp_path):
    config = _write_config(tmp_path)
    runner = CliRunner()
    result = runner.invoke(main, ["gen-data", "--config", str(config), "--seed", "3"])
    assert result.exit_code == 0, result.output
    assert "gemhunt: 2 trajectories" in result.output
    assert (tmp_path / "reports" / "dataset").is_dir()

    result = runner.invoke(main, ["stats", "--config", str(config)])
    assert result.exit_code == 0, result.output


def test_cli_report_without_vocabulary(tmp_path):
    result = CliRunner().invoke(main, ["report", "--config", str(_write_config(tmp_path))])
    assert result.exit_code == 2
    assert "error=VOCABULARY_NOT_FOUND" in result.output
    assert "vocab" in result.output


def test_cli_eval_without_vocabulary(tmp_path, tiny_checkpoint):
    checkpoint = tiny_checkpoint.save(tmp_path / "checkpoints" / "RTG_lambda0.5" / "final.pt")
    result = CliRunner().invoke(
        main,
        [
            "eval",
            "--config",
            str(_write_config(tmp_path)),
            "--checkpoint",
            str(checkpoint),
            "--policy",
            "tilt:10",
        ],
    )
    assert result.exit_code == 2
    assert "error=VOCABULARY_NOT_FOUND" in result.output
