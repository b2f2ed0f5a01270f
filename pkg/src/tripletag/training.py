"""Negative log-likelihood training with Adam and best-dev model selection."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import CorpusRecord
from .crf import forward_backward, log_partition_from, viterbi_from
from .encoder import (
    PARAM_NAMES,
    CrfModel,
    ModelConfig,
    Vocabulary,
    backward,
    emission_scores,
    param_shapes,
    run_encoder,
    zero_grads,
)
from .errors import CheckpointError, EncodingError, NoTrainableInstances
from .evaluation import score
from .tagging import START, STOP, Scheme, TagSequence, Triplet, check_triplets, decode, encode

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    scheme: str = "t"
    max_offset: int = 6
    epochs: int = 20
    batch_size: int = 1
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    dropout: float = 0.5
    seed: int = 0
    use_offset_features: bool = True
    use_opinion_features: bool = True
    structural_mask: bool = True
    embed_dim: int = 300
    hidden: int = 300
    offset_dim: int = 100
    clip_norm: float | None = None
    freeze_embeddings: bool = False
    float32: bool = False
    embeddings: str | None = None

    def __post_init__(self):
        self.scheme = Scheme.parse(self.scheme).value
        if self.max_offset < 0:
            raise ValueError("max_offset must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            embed_dim=self.embed_dim,
            hidden=self.hidden,
            offset_dim=self.offset_dim,
            max_offset=self.max_offset,
            use_offset_features=self.use_offset_features,
            use_opinion_features=self.use_opinion_features,
            structural_mask=self.structural_mask,
            dropout=self.dropout,
            float32=self.float32,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class FilterReport:
    kept: int = 0
    dropped: int = 0
    reasons: dict[str, int] = field(default_factory=dict)


def filter_instances(dataset: Sequence[CorpusRecord], scheme, M: int | None):
    """Drop training sentences that cannot be encoded under ``scheme`` and ``M``.

    ``M=None`` means no offset bound.  Returns ``(kept, report)``.
    """
    kept, report = [], FilterReport()
    for rec in dataset:
        try:
            check_triplets(len(rec.tokens), rec.triplets, scheme, M)
        except EncodingError as exc:
            report.dropped += 1
            name = type(exc).__name__
            report.reasons[name] = report.reasons.get(name, 0) + 1
            continue
        kept.append(rec)
    report.kept = len(kept)
    return kept, report


def _gold_cells(layout, seq):
    return np.array([layout.cell_of(i, t) for i, t in enumerate(seq.tags)])


def instance_loss_grad(
    model: CrfModel,
    record: CorpusRecord,
    scheme,
    rng: np.random.Generator | None = None,
    grads: dict | None = None,
    train_embeddings: bool = True,
):
    """-log p(gold | sentence) and, when ``grads`` is given, accumulate its gradient."""
    M = model.config.max_offset
    seq = encode(record.tokens, record.triplets, scheme, M)
    state = run_encoder(model, record.tokens, rng)
    em = emission_scores(model, state)
    trans = model.effective_transitions()
    gold = _gold_cells(em.layout, seq)
    subs = (START,) + seq.subtags + (STOP,)
    gold_score = float(em.phi[gold].sum()) + sum(float(trans[a, b]) for a, b in zip(subs, subs[1:]))
    if grads is None:
        return log_partition_from(em.phi, em.layout, trans) - gold_score
    log_z, marg, counts = forward_backward(em.phi, em.layout, trans)
    dphi = marg
    np.subtract.at(dphi, gold, 1.0)
    for a, b in zip(subs, subs[1:]):
        counts[a, b] -= 1.0
    grads["transitions"] += counts
    backward(model, em, dphi, grads, train_embeddings)
    return log_z - gold_score


def nll_loss(model: CrfModel, batch: Sequence[CorpusRecord], scheme) -> float:
    """Sum of -log p(gold) over the batch, without dropout."""
    return sum(instance_loss_grad(model, rec, scheme) for rec in batch)


def loss_and_grads(model, batch, scheme, rng=None, train_embeddings=True):
    grads = zero_grads(model)
    loss = sum(instance_loss_grad(model, rec, scheme, rng, grads, train_embeddings) for rec in batch)
    return loss, grads


class Adam:
    def __init__(self, model: CrfModel, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8, frozen=()):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.frozen = set(frozen)
        self.m = {k: np.zeros_like(v, dtype=np.float64) for k, v in model.params.items()}
        self.v = {k: np.zeros_like(v, dtype=np.float64) for k, v in model.params.items()}
        self.t = 0

    def step(self, model: CrfModel, grads: dict[str, np.ndarray]):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            if name in self.frozen:
                continue
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            model.params[name] -= update.astype(model.params[name].dtype)
        model.bump()


def clip_grads(grads, max_norm):
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm:
        for g in grads.values():
            g *= max_norm / total
    return total


def predict_triplets(model: CrfModel, tokens: Sequence[str], scheme) -> set[Triplet]:
    state = run_encoder(model, tokens)
    em = emission_scores(model, state, keep_segments=False)
    path, _ = viterbi_from(em.phi, em.layout, model.effective_transitions())
    seq = TagSequence(tuple(em.layout.tag_at(c) for c in path), Scheme.parse(scheme), em.layout.M)
    return decode(seq, strict=model.config.structural_mask)


def predict_corpus(model, records, scheme) -> list[set[Triplet]]:
    return [predict_triplets(model, r.tokens, scheme) for r in records]


def evaluate_f1(model, records, scheme) -> float:
    if not records:
        return float("nan")
    return score([r.triplets for r in records], predict_corpus(model, records, scheme)).f1


@dataclass
class Checkpoint:
    model: CrfModel
    config: TrainConfig
    dev_f1: float
    epoch: int
    history: list[dict] = field(default_factory=list)

    @property
    def scheme(self) -> Scheme:
        return Scheme.parse(self.config.scheme)

    def predict(self, tokens) -> set[Triplet]:
        return predict_triplets(self.model, tokens, self.scheme)

    def save(self, path) -> None:
        save_checkpoint(self, path)

    @classmethod
    def load(cls, path) -> "Checkpoint":
        return load_checkpoint(path)


def build_vocab(train, dev=()) -> Vocabulary:
    return Vocabulary.from_corpus([r.tokens for r in list(train) + list(dev)])


def train(
    config: TrainConfig,
    train_set: Sequence[CorpusRecord],
    dev_set: Sequence[CorpusRecord] = (),
    vocab: Vocabulary | None = None,
    pretrained: dict | None = None,
    callback: Callable[[int, CrfModel, list], bool] | None = None,
) -> Checkpoint:
    """Train and return the parameters of the best-dev epoch.

    Each epoch shuffles the kept training instances with the seeded generator
    and takes one Adam step per batch.  ``callback(epoch, model, history)``
    runs after each epoch's dev evaluation and may return True to stop.
    Without a dev set the last epoch is kept.
    """
    scheme = Scheme.parse(config.scheme)
    kept, report = filter_instances(train_set, scheme, config.max_offset)
    if report.dropped:
        log.info("dropped %d training instances: %s", report.dropped, report.reasons)
    if not kept:
        raise NoTrainableInstances("no training instance survives filtering")
    rng = np.random.default_rng(config.seed)
    vocab = vocab or build_vocab(train_set, dev_set)
    model = CrfModel.init(vocab, config.model_config(), rng, pretrained)
    frozen = ("embedding",) if config.freeze_embeddings else ()
    opt = Adam(model, config.lr, config.beta1, config.beta2, config.eps, frozen)

    best = None
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(kept))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [kept[q] for q in order[start: start + config.batch_size]]
            loss, grads = loss_and_grads(model, batch, scheme, rng, not config.freeze_embeddings)
            if config.clip_norm:
                clip_grads(grads, config.clip_norm)
            opt.step(model, grads)
            total += loss
        dev_f1 = evaluate_f1(model, dev_set, scheme)
        history.append({"epoch": epoch, "loss": total, "dev_f1": dev_f1})
        log.info("epoch %d loss %.4f dev F1 %.4f", epoch, total, dev_f1)
        better = best is None or (not dev_set) or dev_f1 > best.dev_f1
        if better:
            best = Checkpoint(model.copy(), config, dev_f1, epoch)
        if callback is not None and callback(epoch, model, history):
            break
    best.history = history
    return best


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    """Write ``manifest.json`` plus a little-endian ``params.bin`` into directory ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    dtype = np.dtype("<f4") if ckpt.model.config.float32 else np.dtype("<f8")
    tensors = []
    offset = 0
    with open(path / "params.bin", "wb") as fh:
        for name in PARAM_NAMES:
            arr = np.ascontiguousarray(ckpt.model.params[name], dtype=dtype)
            fh.write(arr.tobytes())
            tensors.append({"name": name, "shape": list(arr.shape), "offset": offset, "count": int(arr.size)})
            offset += arr.nbytes
    manifest = {
        "format_version": CHECKPOINT_VERSION,
        "dtype": dtype.str,
        "config": asdict(ckpt.config),
        "vocab": ckpt.model.vocab.itos,
        "dev_f1": None if ckpt.dev_f1 != ckpt.dev_f1 else ckpt.dev_f1,
        "epoch": ckpt.epoch,
        "history": [
            {k: (None if isinstance(v, float) and v != v else v) for k, v in h.items()} for h in ckpt.history
        ],
        "tensors": tensors,
    }
    with open(path / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    try:
        with open(path / "manifest.json", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint manifest: {exc}") from None
    if manifest.get("format_version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format {manifest.get('format_version')}")
    config = TrainConfig.from_dict(manifest["config"])
    vocab = Vocabulary()
    for tok in manifest["vocab"]:
        vocab.add(tok)
    if vocab.itos != manifest["vocab"]:
        raise CheckpointError("vocabulary must start with the pad and unk entries")
    dtype = np.dtype(manifest["dtype"])
    if dtype.str not in ("<f4", "<f8"):
        raise CheckpointError(f"unsupported payload dtype {dtype.str}")
    payload = (path / "params.bin").read_bytes()
    expected = param_shapes(len(vocab), config.model_config())
    params = {}
    for t in manifest["tensors"]:
        name, shape = t["name"], tuple(t["shape"])
        if expected.get(name) != shape:
            raise CheckpointError(f"tensor {name} has shape {shape}, config implies {expected.get(name)}")
        end = t["offset"] + t["count"] * dtype.itemsize
        if end > len(payload):
            raise CheckpointError(f"payload too short for tensor {name}")
        params[name] = np.frombuffer(payload[t["offset"]: end], dtype=dtype).reshape(shape).astype(
            config.model_config().dtype
        )
    missing = set(PARAM_NAMES) - set(params)
    if missing:
        raise CheckpointError(f"missing tensors: {sorted(missing)}")
    model = CrfModel(vocab, config.model_config(), params)
    dev_f1 = manifest.get("dev_f1")
    return Checkpoint(model, config, float("nan") if dev_f1 is None else dev_f1, manifest["epoch"],
                      manifest.get("history", []))
