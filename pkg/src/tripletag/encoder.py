"""Word embeddings, the bidirectional LSTM encoder and the four factor heads.

Everything is plain numpy with hand-written reverse mode.  A forward pass
returns an :class:`EncoderState` that keeps the activations needed by
:func:`backward`.

Hidden-state storage follows the 1-based layout of the segment formula:
``state.fwd[t]`` is the forward hidden vector at token ``t`` for
``t = 1..n`` with ``state.fwd[0] == 0``, and ``state.bwd[t]`` is the
backward hidden vector with ``state.bwd[n + 1] == 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import IndexOutOfRange, StaleTape, TagWindowOutOfBounds
from .tagging import B, S, NUM_SUBTAGS, Tag, _tagset, offset_pairs

PAD, UNK = "<pad>", "<unk>"

PARAM_NAMES = (
    "embedding",
    "lstm_fwd.W", "lstm_fwd.b",
    "lstm_bwd.W", "lstm_bwd.b",
    "f_t.W", "f_t.b",
    "f_s.W", "f_s.b",
    "f_o.W", "f_o.b",
    "offset_table", "f_r.W", "f_r.b",
    "transitions",
)


class Vocabulary:
    def __init__(self, tokens: Iterable[str] = ()):
        self.itos = [PAD, UNK]
        self.stoi = {PAD: 0, UNK: 1}
        for tok in tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        if token not in self.stoi:
            self.stoi[token] = len(self.itos)
            self.itos.append(token)
        return self.stoi[token]

    def ids(self, tokens: Sequence[str]) -> np.ndarray:
        unk = self.stoi[UNK]
        return np.array([self.stoi.get(t, unk) for t in tokens], dtype=np.int64)

    def __len__(self):
        return len(self.itos)

    def __contains__(self, token):
        return token in self.stoi

    @classmethod
    def from_corpus(cls, sentences: Iterable[Sequence[str]]) -> "Vocabulary":
        vocab = cls()
        for tokens in sentences:
            for tok in tokens:
                vocab.add(tok)
        return vocab


def read_embeddings(path: str | Path, vocab: Vocabulary | None = None) -> tuple[dict[str, np.ndarray], int]:
    """Read GloVe-style text: a token followed by its floats, whitespace separated.

    When ``vocab`` is given only its tokens are kept.  Returns the vectors and
    their dimension.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip().split(" ")
            if len(parts) < 2:
                continue
            if dim is None:
                dim = len(parts) - 1
            if len(parts) - 1 != dim:
                # tokens with embedded spaces occur in some GloVe dumps; the tail is the vector
                parts = [" ".join(parts[: len(parts) - dim])] + parts[len(parts) - dim:]
            token = parts[0]
            if vocab is not None and token not in vocab:
                continue
            vec = np.asarray(parts[1:], dtype=np.float64)
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"{path}:{lineno}: non-finite value for {token!r}")
            vectors[token] = vec
    if dim is None:
        raise ValueError(f"{path}: no embeddings found")
    return vectors, dim


@dataclass
class ModelConfig:
    embed_dim: int = 300
    hidden: int = 300
    offset_dim: int = 100
    max_offset: int = 6
    use_offset_features: bool = True
    use_opinion_features: bool = True
    structural_mask: bool = True
    dropout: float = 0.5
    float32: bool = False

    @property
    def dtype(self):
        return np.float32 if self.float32 else np.float64

    def to_dict(self):
        return asdict(self)


def param_shapes(vocab_size: int, cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    d, H, dr, M = cfg.embed_dim, cfg.hidden, cfg.offset_dim, cfg.max_offset
    return {
        "embedding": (vocab_size, d),
        "lstm_fwd.W": (4 * H, d + H),
        "lstm_fwd.b": (4 * H,),
        "lstm_bwd.W": (4 * H, d + H),
        "lstm_bwd.b": (4 * H,),
        "f_t.W": (NUM_SUBTAGS, 2 * H),
        "f_t.b": (NUM_SUBTAGS,),
        "f_s.W": (3, 3 * H),
        "f_s.b": (3,),
        "f_o.W": (1, 2 * H),
        "f_o.b": (1,),
        "offset_table": (2 * M + 1, dr),
        "f_r.W": (1, dr),
        "f_r.b": (1,),
        "transitions": (NUM_SUBTAGS + 2, NUM_SUBTAGS + 2),
    }


class CrfModel:
    """All trainable parameters plus the vocabulary and model switches."""

    def __init__(self, vocab: Vocabulary, config: ModelConfig, params: dict[str, np.ndarray]):
        self.vocab = vocab
        self.config = config
        expected = param_shapes(len(vocab), config)
        for name, shape in expected.items():
            if name not in params:
                raise ValueError(f"missing parameter {name}")
            if tuple(params[name].shape) != shape:
                raise ValueError(f"parameter {name} has shape {params[name].shape}, expected {shape}")
        self.params = {name: np.asarray(params[name], dtype=config.dtype) for name in PARAM_NAMES}
        self.version = 0

    @classmethod
    def init(
        cls,
        vocab: Vocabulary,
        config: ModelConfig,
        rng: np.random.Generator,
        pretrained: dict[str, np.ndarray] | None = None,
    ) -> "CrfModel":
        shapes = param_shapes(len(vocab), config)
        params = {}
        for name, shape in shapes.items():
            if name in ("embedding", "offset_table"):
                params[name] = rng.uniform(-0.1, 0.1, size=shape)
            elif name == "transitions":
                params[name] = np.zeros(shape)
            else:
                fan_in = shapes[name.split(".")[0] + ".W"][1]
                bound = 1.0 / np.sqrt(fan_in)
                params[name] = rng.uniform(-bound, bound, size=shape)
        params["embedding"][0] = 0.0
        if pretrained:
            for tok, vec in pretrained.items():
                if tok in vocab.stoi:
                    if vec.shape != (config.embed_dim,):
                        raise ValueError(f"pretrained vector for {tok!r} has dimension {vec.shape[0]}")
                    params["embedding"][vocab.stoi[tok]] = vec
        return cls(vocab, config, params)

    @classmethod
    def zeros(cls, vocab: Vocabulary, config: ModelConfig) -> "CrfModel":
        shapes = param_shapes(len(vocab), config)
        return cls(vocab, config, {k: np.zeros(s) for k, s in shapes.items()})

    def effective_transitions(self) -> np.ndarray:
        trans = self.params["transitions"].astype(np.float64)
        if self.config.structural_mask:
            trans = trans + transition_mask()
        return trans

    def bump(self):
        self.version += 1

    def copy(self) -> "CrfModel":
        other = CrfModel(self.vocab, self.config, {k: v.copy() for k, v in self.params.items()})
        return other


@lru_cache(maxsize=1)
def transition_mask() -> np.ndarray:
    from .tagging import ALLOWED, START, STOP

    mask = np.full((NUM_SUBTAGS + 2, NUM_SUBTAGS + 2), -np.inf)
    for src, dsts in ALLOWED.items():
        for dst in dsts:
            mask[src, dst] = 0.0
    mask.setflags(write=False)
    return mask


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _dropout_mask(rng, shape, rate, dtype):
    if rng is None or rate <= 0.0:
        return None
    keep = 1.0 - rate
    return (rng.random(shape) < keep).astype(dtype) / keep


@dataclass
class _LstmCache:
    xs: np.ndarray
    hs: np.ndarray
    cs: np.ndarray
    gates: np.ndarray


def _lstm_forward(W, b, xs):
    """Run one direction over ``xs`` (n x d).  Returns hidden states (n x H) and the cache."""
    n, d = xs.shape
    H = b.shape[0] // 4
    Wx, Wh = W[:, :d], W[:, d:]
    proj = xs @ Wx.T + b
    hs = np.zeros((n + 1, H), dtype=xs.dtype)
    cs = np.zeros((n + 1, H), dtype=xs.dtype)
    gates = np.empty((n, 4 * H), dtype=xs.dtype)
    for t in range(n):
        z = proj[t] + Wh @ hs[t]
        g = np.empty_like(z)
        g[: 2 * H] = _sigmoid(z[: 2 * H])
        g[2 * H: 3 * H] = np.tanh(z[2 * H: 3 * H])
        g[3 * H:] = _sigmoid(z[3 * H:])
        gates[t] = g
        i_g, f_g, c_g, o_g = g[:H], g[H: 2 * H], g[2 * H: 3 * H], g[3 * H:]
        cs[t + 1] = f_g * cs[t] + i_g * c_g
        hs[t + 1] = o_g * np.tanh(cs[t + 1])
    return hs[1:], _LstmCache(xs, hs, cs, gates)


def _lstm_backward(W, cache: _LstmCache, dh_out):
    """Backprop through time.  Returns (dW, db, dxs)."""
    xs, hs, cs, gates = cache.xs, cache.hs, cache.cs, cache.gates
    n, d = xs.shape
    H = gates.shape[1] // 4
    Wh = W[:, d:]
    dz_all = np.zeros_like(gates)
    dh_next = np.zeros(H, dtype=xs.dtype)
    dc_next = np.zeros(H, dtype=xs.dtype)
    for t in range(n - 1, -1, -1):
        g = gates[t]
        i_g, f_g, c_g, o_g = g[:H], g[H: 2 * H], g[2 * H: 3 * H], g[3 * H:]
        dh = dh_out[t] + dh_next
        tc = np.tanh(cs[t + 1])
        dc = dc_next + dh * o_g * (1.0 - tc * tc)
        dz = dz_all[t]
        dz[:H] = dc * c_g * i_g * (1.0 - i_g)
        dz[H: 2 * H] = dc * cs[t] * f_g * (1.0 - f_g)
        dz[2 * H: 3 * H] = dc * i_g * (1.0 - c_g * c_g)
        dz[3 * H:] = dh * tc * o_g * (1.0 - o_g)
        dc_next = dc * f_g
        dh_next = Wh.T @ dz
    inputs = np.concatenate([xs, hs[:-1]], axis=1)
    dW = dz_all.T @ inputs
    db = dz_all.sum(axis=0)
    dxs = dz_all @ W[:, :d]
    return dW, db, dxs


@dataclass
class EncoderState:
    fwd: np.ndarray
    bwd: np.ndarray
    model_id: int
    version: int
    ids: np.ndarray
    emb_mask: np.ndarray | None = None
    out_mask_f: np.ndarray | None = None
    out_mask_b: np.ndarray | None = None
    caches: tuple = field(default=(), repr=False)

    @property
    def n(self) -> int:
        return self.fwd.shape[0] - 1

    @property
    def hidden(self) -> np.ndarray:
        """h_i = [fwd_i; bwd_i] for i = 1..n as an n x 2H matrix."""
        return np.concatenate([self.fwd[1:], self.bwd[1:-1]], axis=1)


def embed(model: CrfModel, tokens: Sequence[str], rng: np.random.Generator | None = None):
    """Embedding rows for ``tokens``; dropout is applied only when ``rng`` is given."""
    if len(tokens) == 0:
        raise ValueError("empty sentence")
    ids = model.vocab.ids(tokens)
    xs = model.params["embedding"][ids]
    mask = _dropout_mask(rng, xs.shape, model.config.dropout, xs.dtype)
    if mask is not None:
        xs = xs * mask
    return ids, xs, mask


def run_encoder(model: CrfModel, tokens: Sequence[str], rng: np.random.Generator | None = None) -> EncoderState:
    """Forward pass of embeddings and both LSTM directions.

    Passing ``rng`` switches on training-mode dropout; masks are drawn from it
    so the pass is reproducible for a seeded generator.
    """
    p = model.params
    ids, xs, emb_mask = embed(model, tokens, rng)
    n = len(ids)
    hf, cache_f = _lstm_forward(p["lstm_fwd.W"], p["lstm_fwd.b"], xs)
    hb_rev, cache_b = _lstm_forward(p["lstm_bwd.W"], p["lstm_bwd.b"], xs[::-1].copy())
    hb = hb_rev[::-1]
    rate = model.config.dropout
    mf = _dropout_mask(rng, hf.shape, rate, hf.dtype)
    mb = _dropout_mask(rng, hb.shape, rate, hb.dtype)
    H = hf.shape[1]
    fwd = np.zeros((n + 1, H), dtype=hf.dtype)
    bwd = np.zeros((n + 2, H), dtype=hf.dtype)
    fwd[1:] = hf if mf is None else hf * mf
    bwd[1: n + 1] = hb if mb is None else hb * mb
    return EncoderState(fwd, bwd, id(model), model.version, ids, emb_mask, mf, mb, (cache_f, cache_b))


def segment_repr(state: EncoderState, a: int, b: int) -> np.ndarray:
    """Span vector for tokens ``a..b`` (1-based, inclusive)."""
    n = state.n
    if not 1 <= a <= b <= n:
        raise IndexOutOfRange(f"segment [{a},{b}] outside 1..{n}")
    return np.concatenate([state.fwd[b] - state.fwd[a - 1], state.bwd[a] - state.bwd[b + 1]])


def offset_score(model: CrfModel, j: int, k: int) -> float:
    p = model.params
    row = min(j, k) + model.config.max_offset
    return float(p["f_r.W"][0] @ p["offset_table"][row] + p["f_r.b"][0])


def factor_scores(model: CrfModel, state: EncoderState, i: int, tag: Tag) -> float:
    """Emission score of ``tag`` at 0-based position ``i``, computed one term at a time."""
    p, cfg = model.params, model.config
    n = state.n
    if not 0 <= i < n:
        raise IndexOutOfRange(f"position {i} outside sentence of length {n}")
    h = np.concatenate([state.fwd[i + 1], state.bwd[i + 1]])
    score = float(p["f_t.W"][tag.sub] @ h + p["f_t.b"][tag.sub])
    if not tag.carries_triplet:
        return score
    a, b = i + tag.j, i + tag.k
    if a < 0 or b > n - 1 or a > b or max(abs(tag.j), abs(tag.k)) > cfg.max_offset:
        raise TagWindowOutOfBounds(f"{tag} at position {i} has no valid window")
    g = segment_repr(state, a + 1, b + 1)
    eps = int(tag.sentiment)
    score += float(p["f_s.W"][eps] @ np.concatenate([g, state.bwd[i + 1]]) + p["f_s.b"][eps])
    if cfg.use_opinion_features:
        score += float(p["f_o.W"][0] @ g + p["f_o.b"][0])
    if cfg.use_offset_features:
        score += offset_score(model, tag.j, tag.k)
    return score


class LatticeLayout:
    """Flat indexing of every (position, tag) cell for a sentence length and M.

    Cells of position ``i`` occupy ``offsets[i]:offsets[i+1]`` in canonical
    tag order, so each position holds five contiguous groups I, E, O, B.., S..
    """

    GROUP_SUBTAGS = np.array([1, 3, 2, 0, 4])  # memory order I, E, O, B, S as sub-tag ids

    def __init__(self, n: int, M: int):
        self.n, self.M = n, M
        offsets = [0]
        group_starts = []
        cell_pos, cell_sub, cell_eps, cell_pair = [], [], [], []
        pair_pos, pair_a, pair_b, pair_r = [], [], [], []
        for i in range(n):
            pairs = offset_pairs(n, i, M)
            base = len(pair_pos)
            for j, k in pairs:
                pair_pos.append(i)
                pair_a.append(i + j)
                pair_b.append(i + k)
                pair_r.append(min(j, k))
            start = offsets[-1]
            P = len(pairs)
            group_starts.extend([start, start + 1, start + 2, start + 3, start + 3 + 3 * P])
            cell_pos.extend([i] * (3 + 6 * P))
            cell_sub.extend([1, 3, 2] + [B] * (3 * P) + [S] * (3 * P))
            cell_eps.extend([-1, -1, -1] + [e for _ in range(2) for e in range(3) for _ in range(P)])
            cell_pair.extend([-1, -1, -1] + [base + q for _ in range(2) for _ in range(3) for q in range(P)])
            offsets.append(start + 3 + 6 * P)
        self.offsets = np.array(offsets)
        self.group_starts = np.array(group_starts)
        self.cell_pos = np.array(cell_pos)
        self.cell_sub = np.array(cell_sub)
        self.cell_eps = np.array(cell_eps)
        self.cell_pair = np.array(cell_pair)
        self.bs = self.cell_pair >= 0
        self.pair_pos = np.array(pair_pos)
        self.pair_a = np.array(pair_a)
        self.pair_b = np.array(pair_b)
        self.pair_r = np.array(pair_r)

    @property
    def num_cells(self) -> int:
        return int(self.offsets[-1])

    def tags(self, i: int) -> tuple[Tag, ...]:
        return _tagset(self.n, i, self.M)

    def tag_at(self, cell: int) -> Tag:
        i = int(self.cell_pos[cell])
        return _tagset(self.n, i, self.M)[cell - self.offsets[i]]

    def cell_of(self, i: int, tag: Tag) -> int:
        return int(self.offsets[i]) + _cell_index(self.n, i, self.M)[tag]


@lru_cache(maxsize=256)
def _cell_index(n, i, M):
    return {t: q for q, t in enumerate(_tagset(n, i, M))}


@lru_cache(maxsize=64)
def lattice_layout(n: int, M: int) -> LatticeLayout:
    return LatticeLayout(n, M)


@dataclass
class Emissions:
    """Emission scores for every lattice cell, plus what backprop needs."""

    layout: LatticeLayout
    phi: np.ndarray
    hidden: np.ndarray
    segments: np.ndarray | None
    state: EncoderState


PAIR_CHUNK = 128


def emission_scores(model: CrfModel, state: EncoderState, M: int | None = None,
                    keep_segments: bool = True) -> Emissions:
    """Vectorized emission scores for all cells of the sentence's lattice.

    Segment representations are built in fixed-size chunks of offset pairs so
    the working set stays small; ``keep_segments=False`` drops them once
    scored (enough for decoding, not for backprop).
    """
    p, cfg = model.params, model.config
    M = cfg.max_offset if M is None else M
    if M > cfg.max_offset:
        raise ValueError(f"lattice M={M} exceeds the offset table's M={cfg.max_offset}")
    n = state.n
    lay = lattice_layout(n, M)
    H = state.fwd.shape[1]
    hid = state.hidden
    ft = hid @ p["f_t.W"].T + p["f_t.b"]
    phi = ft[lay.cell_pos, lay.cell_sub].astype(np.float64)

    Ws = p["f_s.W"]
    W = Ws[:, : 2 * H]
    if cfg.use_opinion_features:
        # f_o adds the same span score to every sentiment column
        W = W + p["f_o.W"]
    local = state.bwd[1: n + 1] @ Ws[:, 2 * H:].T + p["f_s.b"]
    if cfg.use_opinion_features:
        local = local + p["f_o.b"]
    num_pairs = len(lay.pair_pos)
    pair_scores = np.empty((num_pairs, 3))
    seg_all = np.empty((num_pairs, 2 * H), dtype=state.fwd.dtype) if keep_segments else None
    for lo in range(0, num_pairs, PAIR_CHUNK):
        hi = min(lo + PAIR_CHUNK, num_pairs)
        a, b = lay.pair_a[lo:hi], lay.pair_b[lo:hi]
        seg = np.concatenate([state.fwd[b + 1] - state.fwd[a], state.bwd[a + 1] - state.bwd[b + 2]], axis=1)
        pair_scores[lo:hi] = seg @ W.T
        if keep_segments:
            seg_all[lo:hi] = seg
    pair_scores += local[lay.pair_pos]
    if cfg.use_offset_features:
        row_scores = p["offset_table"] @ p["f_r.W"][0] + p["f_r.b"][0]
        pair_scores += row_scores[lay.pair_r + cfg.max_offset][:, None]
    bs = lay.bs
    phi[bs] += pair_scores[lay.cell_pair[bs], lay.cell_eps[bs]]
    return Emissions(lay, phi, hid, seg_all, state)


def _check_tape(model: CrfModel, state: EncoderState):
    if state.model_id != id(model) or state.version != model.version or not state.caches:
        raise StaleTape("encoder state does not belong to the current parameters")


def zero_grads(model: CrfModel) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v, dtype=np.float64) for k, v in model.params.items()}


def backward(
    model: CrfModel,
    em: Emissions,
    dphi: np.ndarray,
    grads: dict[str, np.ndarray] | None = None,
    train_embeddings: bool = True,
) -> dict[str, np.ndarray]:
    """Accumulate parameter gradients given d(loss)/d(emission score) per cell."""
    state = em.state
    _check_tape(model, state)
    if em.segments is None:
        raise ValueError("emission scores were computed with keep_segments=False")
    if grads is None:
        grads = zero_grads(model)
    p, cfg = model.params, model.config
    lay = em.layout
    n = state.n
    H = state.fwd.shape[1]

    dft = np.zeros((n, NUM_SUBTAGS))
    np.add.at(dft, (lay.cell_pos, lay.cell_sub), dphi)
    grads["f_t.W"] += dft.T @ em.hidden
    grads["f_t.b"] += dft.sum(axis=0)
    dhid = dft @ p["f_t.W"]

    dfwd = np.zeros_like(state.fwd, dtype=np.float64)
    dbwd = np.zeros_like(state.bwd, dtype=np.float64)
    dfwd[1:] += dhid[:, :H]
    dbwd[1: n + 1] += dhid[:, H:]

    bs = lay.bs
    dpair = np.zeros((len(lay.pair_pos), 3))
    np.add.at(dpair, (lay.cell_pair[bs], lay.cell_eps[bs]), dphi[bs])
    Ws = p["f_s.W"]
    seg = em.segments
    grads["f_s.b"] += dpair.sum(axis=0)
    grads["f_s.W"][:, : 2 * H] += dpair.T @ seg
    dseg = dpair @ Ws[:, : 2 * H]
    dlocal = np.zeros((n, 3))
    np.add.at(dlocal, lay.pair_pos, dpair)
    grads["f_s.W"][:, 2 * H:] += dlocal.T @ state.bwd[1: n + 1]
    dbwd[1: n + 1] += dlocal @ Ws[:, 2 * H:]

    dsum = dpair.sum(axis=1)
    if cfg.use_opinion_features:
        grads["f_o.W"] += dsum[None, :] @ seg
        grads["f_o.b"] += dsum.sum()
        dseg += dsum[:, None] * p["f_o.W"]
    if cfg.use_offset_features:
        drow = np.zeros(p["offset_table"].shape[0])
        np.add.at(drow, lay.pair_r + cfg.max_offset, dsum)
        grads["f_r.W"] += (drow @ p["offset_table"])[None, :]
        grads["f_r.b"] += drow.sum()
        grads["offset_table"] += np.outer(drow, p["f_r.W"][0])

    a, b = lay.pair_a, lay.pair_b
    np.add.at(dfwd, b + 1, dseg[:, :H])
    np.add.at(dfwd, a, -dseg[:, :H])
    np.add.at(dbwd, a + 1, dseg[:, H:])
    np.add.at(dbwd, b + 2, -dseg[:, H:])

    encoder_backward(model, state, dfwd, dbwd, grads, train_embeddings)
    return grads


def encoder_backward(model, state, dfwd, dbwd, grads, train_embeddings=True):
    """Push hidden-state gradients back through dropout, both LSTMs and the embeddings."""
    _check_tape(model, state)
    p = model.params
    n = state.n
    dhf = dfwd[1:]
    dhb = dbwd[1: n + 1]
    if state.out_mask_f is not None:
        dhf = dhf * state.out_mask_f
        dhb = dhb * state.out_mask_b
    cache_f, cache_b = state.caches
    dW, db, dx_f = _lstm_backward(p["lstm_fwd.W"], cache_f, dhf)
    grads["lstm_fwd.W"] += dW
    grads["lstm_fwd.b"] += db
    dW, db, dx_b = _lstm_backward(p["lstm_bwd.W"], cache_b, dhb[::-1])
    grads["lstm_bwd.W"] += dW
    grads["lstm_bwd.b"] += db
    dxs = dx_f + dx_b[::-1]
    if state.emb_mask is not None:
        dxs = dxs * state.emb_mask
    if train_embeddings:
        np.add.at(grads["embedding"], state.ids, dxs)
    return grads
