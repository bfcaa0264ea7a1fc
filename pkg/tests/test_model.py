import json
import math

import pytest
import torch

from src.errors import (
    CheckpointNotFoundError,
    ConfigError,
    SequenceTooLongError,
    TrainingDivergedError,
)
from src.model import (
    Checkpoint,
    FixedPairs,
    ModelConfig,
    TrainConfig,
    collate,
    combine,
    gradient_check,
    loss,
    parameter_gradients,
    span_losses,
    span_report,
    train,
)


def _distribution(checkpoint, pair, vocab, prefix_length=3):
    return checkpoint.next_token_distribution(
        pair.input_ids, pair.output_ids[:prefix_length], vocab.bos_id
    )


def test_model_config_heads_must_divide_width():
    with pytest.raises(ValueError):
        ModelConfig(vocab_size=10, model_width=30, attention_heads=4)


def test_distribution_is_categorical_and_deterministic(tiny_checkpoint, walkthrough_pairs, vocab):
    first = _distribution(tiny_checkpoint, walkthrough_pairs[2], vocab)
    second = _distribution(tiny_checkpoint, walkthrough_pairs[2], vocab)
    assert first.shape == (len(vocab),)
    assert torch.all(first >= 0)
    assert abs(first.sum().item() - 1.0) < 1e-6
    assert torch.equal(first, second)


def test_fresh_model_is_near_uniform(vocab, walkthrough_pairs):
    checkpoint = Checkpoint.initialize(ModelConfig(vocab_size=len(vocab)), vocab.version)
    probabilities = _distribution(checkpoint, walkthrough_pairs[0], vocab)
    entropy = -(probabilities * probabilities.log()).sum().item()
    assert entropy >= 0.85 * math.log(len(vocab))


def test_same_init_seed_same_weights(tiny_config, vocab):
    first = Checkpoint.initialize(tiny_config, vocab.version).model.state_dict()
    second = Checkpoint.initialize(tiny_config, vocab.version).model.state_dict()
    assert all(torch.equal(first[name], second[name]) for name in first)


def test_overlong_input_rejected(tiny_checkpoint, vocab):
    too_long = [vocab.bos_id] * (tiny_checkpoint.config.max_input_tokens + 1)
    with pytest.raises(SequenceTooLongError):
        tiny_checkpoint.next_token_distribution(too_long, [], vocab.bos_id)


def test_span_arithmetic():
    has = torch.tensor([True])
    value = combine(torch.tensor([3.0]), torch.tensor([1.5]), has, 0.5)
    assert value.item() == pytest.approx(2.5)
    assert combine(torch.tensor([3.0]), torch.tensor([1.5]), has, 0.0).item() == 3.0
    assert combine(torch.tensor([0.0]), torch.tensor([0.0]), has, 0.5).item() == 0.0
    missing = torch.tensor([False])
    assert combine(torch.tensor([3.0]), torch.tensor([0.0]), missing, 1.0).item() == 3.0


def test_loss_recombines_span_losses(tiny_checkpoint, walkthrough_pairs, vocab):
    model = tiny_checkpoint.model.double()
    pairs = walkthrough_pairs[:-1]
    spans = span_losses(model, collate(pairs, vocab.pad_id, vocab.bos_id))
    assert bool(spans.has_observation.all())
    for lambda_ in (0.0, 0.5, 1.0):
        total = loss(tiny_checkpoint, pairs, lambda_, vocab).item()
        expected = ((spans.goal_action + lambda_ * spans.observation) / (1 + lambda_)).mean()
        assert abs(total - expected.item()) < 1e-9


def test_last_split_uses_goal_action_only(tiny_checkpoint, walkthrough_pairs, vocab):
    last = walkthrough_pairs[-1]
    assert not last.has_observation
    model = tiny_checkpoint.model
    spans = span_losses(model, collate([last], vocab.pad_id, vocab.bos_id))
    for lambda_ in (0.0, 0.5, 4.0):
        total = loss(tiny_checkpoint, [last], lambda_, vocab)
        assert torch.allclose(total, spans.goal_action.mean())


def test_teacher_forcing_is_causal(tiny_checkpoint, walkthrough_pairs, vocab):
    pair = walkthrough_pairs[1]
    source = torch.tensor([pair.input_ids])
    target = torch.tensor([[vocab.bos_id, *pair.output_ids[:-1]]])
    altered = target.clone()
    k = 5
    altered[0, k + 1 :] = vocab.unk_id
    model = tiny_checkpoint.model.eval()
    with torch.no_grad():
        original = model(source, target)
        changed = model(source, altered)
    assert torch.allclose(original[0, : k + 1], changed[0, : k + 1], atol=1e-6)
    assert not torch.allclose(original[0, k + 1 :], changed[0, k + 1 :])


def test_checkpoint_round_trip_is_exact(tiny_checkpoint, walkthrough_pairs, vocab, tmp_path):
    tiny_checkpoint.step = 17
    path = tiny_checkpoint.save(tmp_path / "ckpt" / "model.pt")
    loaded = Checkpoint.load(path)
    assert loaded.step == 17
    assert loaded.vocab_version == vocab.version
    assert loaded.config == tiny_checkpoint.config
    pair = walkthrough_pairs[4]
    assert torch.equal(
        _distribution(tiny_checkpoint, pair, vocab), _distribution(loaded, pair, vocab)
    )


def test_missing_checkpoint(tmp_path):
    with pytest.raises(CheckpointNotFoundError, match="nope.pt"):
        Checkpoint.load(tmp_path / "nope.pt")


def test_gradient_check_passes(tiny_checkpoint, walkthrough_pairs, vocab):
    result = gradient_check(tiny_checkpoint, walkthrough_pairs[3], vocab, samples=128)
    assert result.checked == 128
    assert result.max_relative_error < 1e-3


def test_unused_embedding_row_has_zero_gradient(tiny_checkpoint, walkthrough_pairs, vocab):
    pair = walkthrough_pairs[3]
    used = set(pair.input_ids) | set(pair.output_ids) | {vocab.bos_id}
    unused = next(index for index in range(len(vocab)) if index not in used)
    gradients = parameter_gradients(tiny_checkpoint, pair, vocab, 0.5)
    assert torch.count_nonzero(gradients["embed.weight"][unused]) == 0


def test_observation_weight_changes_decoder_gradients(tiny_checkpoint, walkthrough_pairs, vocab):
    pair = walkthrough_pairs[3]
    without = parameter_gradients(tiny_checkpoint, pair, vocab, 0.0)
    with_aux = parameter_gradients(tiny_checkpoint, pair, vocab, 0.5)
    assert not torch.allclose(without["head.weight"], with_aux["head.weight"])
    decoder = [name for name in without if name.startswith("decoder.")]
    assert any(not torch.allclose(without[name], with_aux[name]) for name in decoder)


def _smoke_pairs(walkthrough_pairs):
    return walkthrough_pairs + walkthrough_pairs[:2]


def test_training_reduces_loss(tiny_checkpoint, walkthrough_pairs, vocab, tmp_path):
    pairs = _smoke_pairs(walkthrough_pairs)
    assert len(pairs) == 10
    config = TrainConfig(
        learning_rate=3e-3, batch_size=10, epochs=50, checkpoint_every=25, log_every=10
    )
    run = train(
        tiny_checkpoint,
        FixedPairs(pairs),
        config,
        vocab,
        checkpoint_dir=tmp_path / "series",
        metrics_path=tmp_path / "series" / "metrics.jsonl",
    )
    assert len(run.history) == 50
    assert run.history[-1].loss <= 0.9 * run.history[0].loss
    assert tiny_checkpoint.step == 50
    names = sorted(path.name for path in (tmp_path / "series").glob("*.pt"))
    assert names == ["final.pt", "step_000025.pt", "step_000050.pt"]

    records = [
        json.loads(line)
        for line in (tmp_path / "series" / "metrics.jsonl").read_text().splitlines()
    ]
    assert len(records) == 50
    assert set(records[0]) == {"step", "epoch", "loss", "loss_goal_action", "loss_observation"}


def test_training_is_reproducible(tiny_config, walkthrough_pairs, vocab):
    config = TrainConfig(learning_rate=1e-3, batch_size=4, epochs=3, shuffle_seed=5)
    finals = []
    for _ in range(2):
        checkpoint = Checkpoint.initialize(tiny_config, vocab.version)
        finals.append(train(checkpoint, FixedPairs(walkthrough_pairs), config, vocab).final_loss)
    assert abs(finals[0] - finals[1]) < 1e-6


def test_span_report_tracks_observation_weight(tiny_config, walkthrough_pairs, vocab):
    fresh = Checkpoint.initialize(tiny_config, vocab.version)
    before = span_report(fresh, walkthrough_pairs, vocab)
    assert before.pairs == len(walkthrough_pairs)
    assert before.observation_stderr > 0

    after = {}
    for lambda_ in (0.0, 0.5):
        checkpoint = Checkpoint.initialize(tiny_config, vocab.version)
        config = TrainConfig(learning_rate=3e-3, batch_size=8, epochs=80, lambda_=lambda_)
        train(checkpoint, FixedPairs(walkthrough_pairs), config, vocab)
        after[lambda_] = span_report(checkpoint, walkthrough_pairs, vocab)

    for report in after.values():
        assert report.goal_action < before.goal_action
    assert after[0.5].observation < before.observation - before.observation_stderr
    assert after[0.5].observation < after[0.0].observation


def test_gradient_accumulation_counts_optimizer_steps(tiny_checkpoint, walkthrough_pairs, vocab):
    config = TrainConfig(batch_size=2, gradient_accumulation=2, epochs=1)
    run = train(tiny_checkpoint, FixedPairs(walkthrough_pairs), config, vocab)
    assert len(run.history) == 2


def test_non_finite_loss_aborts(tiny_checkpoint, walkthrough_pairs, vocab, monkeypatch):
    def broken(model, batch, lambda_):
        return torch.tensor(float("nan"), requires_grad=True), None

    monkeypatch.setattr("src.model.trainer.batch_loss", broken)
    with pytest.raises(TrainingDivergedError, match="step 1"):
        train(tiny_checkpoint, FixedPairs(walkthrough_pairs), TrainConfig(epochs=1), vocab)


def test_vocabulary_mismatch_rejected(tiny_config, walkthrough_pairs, vocab):
    checkpoint = Checkpoint.initialize(tiny_config, "000000000000")
    with pytest.raises(ConfigError):
        train(checkpoint, FixedPairs(walkthrough_pairs), TrainConfig(epochs=1), vocab)
