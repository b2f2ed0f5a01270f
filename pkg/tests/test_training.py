import math

import numpy as np
import pytest

from tripletag.corpus import CorpusRecord
from tripletag.encoder import CrfModel, ModelConfig, Vocabulary
from tripletag.errors import CheckpointError, NoTrainableInstances
from tripletag.synthetic import generate
from tripletag.tagging import Span, Triplet
from tripletag.training import (
    TrainConfig,
    evaluate_f1,
    filter_instances,
    load_checkpoint,
    loss_and_grads,
    nll_loss,
    save_checkpoint,
    train,
)

SMALL = dict(hidden=8, embed_dim=8, offset_dim=4, max_offset=3, dropout=0.0, lr=5e-3)


def test_filter_instances(example_tokens, example_triplets):
    rec = CorpusRecord(example_tokens, sorted(example_triplets))
    kept, report = filter_instances([rec], "t", 3)
    assert kept == [] and report.reasons == {"OffsetExceedsM": 1}
    kept, _ = filter_instances([rec], "t", 6)
    assert kept == [rec]
    clash = CorpusRecord(["a", "b", "c"], [Triplet.make((0, 0), (1, 1), "POS"), Triplet.make((0, 0), (2, 2), "POS")])
    kept, report = filter_instances([rec, clash], "t", None)
    assert kept == [rec] and report.dropped == 1


def test_loss_single_token_zero_model():
    cfg = ModelConfig(embed_dim=2, hidden=2, offset_dim=2, max_offset=2, dropout=0.0)
    model = CrfModel.zeros(Vocabulary(["a"]), cfg)
    assert nll_loss(model, [CorpusRecord(["a"], [])], "t") == pytest.approx(math.log(4), abs=1e-12)


def test_loss_near_zero_with_margin():
    cfg = ModelConfig(embed_dim=2, hidden=2, offset_dim=2, max_offset=1, dropout=0.0)
    model = CrfModel.zeros(Vocabulary(["a"]), cfg)
    model.params["f_t.b"][2] = 50.0  # O
    assert nll_loss(model, [CorpusRecord(["a", "a"], [])], "t") < 1e-15


def test_gradients_zero_lr_identity():
    data = generate(4, seed=3)
    cfg = TrainConfig(epochs=3, **{**SMALL, "lr": 0.0})
    ckpt = train(cfg, data, data)
    fresh = train(TrainConfig(epochs=1, **{**SMALL, "lr": 0.0}), data, data)
    for k in ckpt.model.params:
        np.testing.assert_array_equal(ckpt.model.params[k], fresh.model.params[k])
    assert len({h["dev_f1"] for h in ckpt.history}) == 1
    assert ckpt.epoch == 1  # ties keep the earliest epoch


def test_no_trainable_instances():
    bad = [CorpusRecord(["a"] * 12, [Triplet.make((10, 10), (0, 0), "POS")])]
    with pytest.raises(NoTrainableInstances):
        train(TrainConfig(**SMALL), bad)


def test_deterministic_training():
    data = generate(6, seed=5)
    cfg = TrainConfig(epochs=3, **SMALL)
    a, b = train(cfg, data, data), train(cfg, data, data)
    for k in a.model.params:
        np.testing.assert_array_equal(a.model.params[k], b.model.params[k])
    assert a.history == b.history


def test_training_reduces_loss():
    data = generate(10, seed=7)
    ckpt = train(TrainConfig(epochs=8, **SMALL), data)
    losses = [h["loss"] for h in ckpt.history]
    assert losses[-1] < losses[0] / 2
    assert ckpt.epoch == 8  # no dev set: last epoch


def test_callback_can_stop():
    data = generate(4, seed=1)
    ckpt = train(TrainConfig(epochs=10, **SMALL), data, callback=lambda e, m, h: e == 2)
    assert len(ckpt.history) == 2


def test_loss_and_grads_shapes(rng):
    data = generate(2, seed=2)
    ckpt = train(TrainConfig(epochs=1, **SMALL), data)
    loss, grads = loss_and_grads(ckpt.model, data, "t")
    assert loss > 0
    assert set(grads) == set(ckpt.model.params)
    for k, g in grads.items():
        assert g.shape == ckpt.model.params[k].shape


def test_checkpoint_roundtrip(tmp_path):
    data = generate(5, seed=4)
    ckpt = train(TrainConfig(epochs=2, **SMALL), data, data)
    save_checkpoint(ckpt, tmp_path / "ck")
    back = load_checkpoint(tmp_path / "ck")
    for k in ckpt.model.params:
        np.testing.assert_array_equal(ckpt.model.params[k], back.model.params[k])
    assert back.config == ckpt.config and back.epoch == ckpt.epoch
    assert back.model.vocab.itos == ckpt.model.vocab.itos
    assert evaluate_f1(back.model, data, "t") == evaluate_f1(ckpt.model, data, "t")
    raw = (tmp_path / "ck" / "params.bin").read_bytes()
    assert len(raw) == sum(v.size for v in ckpt.model.params.values()) * 8


def test_checkpoint_errors(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing")
    data = generate(3, seed=4)
    ckpt = train(TrainConfig(epochs=1, **SMALL), data)
    save_checkpoint(ckpt, tmp_path / "ck")
    (tmp_path / "ck" / "params.bin").write_bytes(b"\0" * 16)
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "ck")


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        TrainConfig.from_dict({"nonsense": 1})
    with pytest.raises(ValueError):
        TrainConfig(dropout=1.5)
    path = tmp_path / "c.json"
    path.write_text('{"scheme": "o", "max_offset": 4}')
    cfg = TrainConfig.from_file(path)
    assert cfg.scheme == "o" and cfg.max_offset == 4


def test_predict_is_decodable_opinion_first():
    data = generate(8, seed=9)
    cfg = TrainConfig(epochs=30, scheme="o", **{**SMALL, "hidden": 16, "embed_dim": 16})
    ckpt = train(cfg, data, data)
    for rec in data:
        for t in ckpt.predict(rec.tokens):
            assert isinstance(t.target, Span)
    assert ckpt.dev_f1 > 0.9
