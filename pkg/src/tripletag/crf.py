"""Sequence scores, the partition function, MAP decoding and an enumeration oracle.

Transitions only look at sub-tags, so every lattice recursion collapses to a
five-state chain: per position we reduce the emission scores within each
sub-tag group (max for decoding, log-sum-exp for the partition function) and
then run the chain over those group summaries.  That keeps the work at one
pass over the ``O(n M^2)`` cells plus ``O(25 n)`` for the chain.
"""
from __future__ import annotations

import numpy as np

from .encoder import CrfModel, EncoderState, Emissions, LatticeLayout, emission_scores, factor_scores
from .errors import InvalidSequence, TooManySequences
from .tagging import (
    ALLOWED,
    NUM_SUBTAGS,
    START,
    STOP,
    Scheme,
    TagSequence,
    bioes_ok,
    enumerate_tagset,
    offset_pairs,
)

# sub-tag ids listed in canonical kind order (I, E, O, B, S) for tie-breaking
CANONICAL_SUBTAGS = LatticeLayout.GROUP_SUBTAGS


def _lse(x, axis=None):
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis) if axis is not None else out.item()


def _group_logsumexp(phi: np.ndarray, lay: LatticeLayout) -> np.ndarray:
    starts = lay.group_starts
    m = np.maximum.reduceat(phi, starts)
    sizes = np.diff(np.append(starts, phi.shape[0]))
    s = np.add.reduceat(np.exp(phi - np.repeat(m, sizes)), starts)
    out = np.empty((lay.n, NUM_SUBTAGS))
    out[:, CANONICAL_SUBTAGS] = (m + np.log(s)).reshape(lay.n, NUM_SUBTAGS)
    return out


def _group_argmax(phi: np.ndarray, lay: LatticeLayout) -> tuple[np.ndarray, np.ndarray]:
    """Per (position, sub-tag): best emission and the first cell attaining it."""
    starts = lay.group_starts
    m = np.maximum.reduceat(phi, starts)
    sizes = np.diff(np.append(starts, phi.shape[0]))
    idx = np.where(phi == np.repeat(m, sizes), np.arange(phi.shape[0]), phi.shape[0])
    first = np.minimum.reduceat(idx, starts)
    best = np.empty((lay.n, NUM_SUBTAGS))
    cell = np.empty((lay.n, NUM_SUBTAGS), dtype=np.int64)
    best[:, CANONICAL_SUBTAGS] = m.reshape(lay.n, NUM_SUBTAGS)
    cell[:, CANONICAL_SUBTAGS] = first.reshape(lay.n, NUM_SUBTAGS)
    return best, cell


def forward_backward(phi: np.ndarray, lay: LatticeLayout, trans: np.ndarray):
    """Log-partition, per-cell marginals and expected transition counts.

    ``trans`` is the effective 7 x 7 transition matrix (mask already added).
    Returns ``(log_z, cell_marginals, transition_counts)``.
    """
    n = lay.n
    T = trans[:NUM_SUBTAGS, :NUM_SUBTAGS]
    L = _group_logsumexp(phi, lay)
    into = np.empty((n, NUM_SUBTAGS))  # log-mass of prefixes ending just before i, by sub-tag at i
    into[0] = trans[START, :NUM_SUBTAGS]
    for i in range(1, n):
        into[i] = _lse((into[i - 1] + L[i - 1])[:, None] + T, axis=0)
    alpha_end = into[n - 1] + L[n - 1]
    log_z = _lse(alpha_end + trans[:NUM_SUBTAGS, STOP])

    out = np.empty((n, NUM_SUBTAGS))  # log-mass of suffixes after i, given the sub-tag at i
    out[n - 1] = trans[:NUM_SUBTAGS, STOP]
    for i in range(n - 2, -1, -1):
        out[i] = _lse(T + (L[i + 1] + out[i + 1])[None, :], axis=1)

    with np.errstate(invalid="ignore"):
        ctx = into + out - log_z
        marg = np.exp(phi + ctx[lay.cell_pos, lay.cell_sub])
        counts = np.zeros_like(trans)
        counts[START, :NUM_SUBTAGS] = np.exp(trans[START, :NUM_SUBTAGS] + L[0] + out[0] - log_z)
        counts[:NUM_SUBTAGS, STOP] = np.exp(alpha_end + trans[:NUM_SUBTAGS, STOP] - log_z)
        for i in range(n - 1):
            a = into[i] + L[i]
            b = L[i + 1] + out[i + 1]
            counts[:NUM_SUBTAGS, :NUM_SUBTAGS] += np.exp(a[:, None] + T + b[None, :] - log_z)
    return log_z, np.nan_to_num(marg), np.nan_to_num(counts)


def log_partition_from(phi: np.ndarray, lay: LatticeLayout, trans: np.ndarray) -> float:
    n = lay.n
    T = trans[:NUM_SUBTAGS, :NUM_SUBTAGS]
    L = _group_logsumexp(phi, lay)
    alpha = trans[START, :NUM_SUBTAGS] + L[0]
    for i in range(1, n):
        alpha = _lse(alpha[:, None] + T, axis=0) + L[i]
    return _lse(alpha + trans[:NUM_SUBTAGS, STOP])


def viterbi_from(phi: np.ndarray, lay: LatticeLayout, trans: np.ndarray) -> tuple[list[int], float]:
    """MAP path as cell indices plus its score.

    At every max the first tag in canonical order wins.
    """
    n = lay.n
    T = trans[:NUM_SUBTAGS, :NUM_SUBTAGS]
    best, cell = _group_argmax(phi, lay)
    order = CANONICAL_SUBTAGS
    back = np.zeros((n, NUM_SUBTAGS), dtype=np.int64)
    # rows permuted into canonical order so argmax's first hit is the canonical winner
    T_ord = T[order]
    cols = np.arange(NUM_SUBTAGS)
    pi = trans[START, :NUM_SUBTAGS] + best[0]
    for i in range(1, n):
        cand = pi[order][:, None] + T_ord
        pick = cand.argmax(axis=0)
        back[i] = order[pick]
        pi = cand[pick, cols] + best[i]
    final = (pi + trans[:NUM_SUBTAGS, STOP])[order]
    s = int(order[np.argmax(final)])
    score = float(np.max(final))
    path = [0] * n
    for i in range(n - 1, -1, -1):
        path[i] = int(cell[i, s])
        s = int(back[i, s])
    return path, score


def _lattice(model: CrfModel, state: EncoderState, M: int | None) -> Emissions:
    return emission_scores(model, state, M, keep_segments=False)


def log_partition(model: CrfModel, state: EncoderState, M: int | None = None) -> float:
    em = _lattice(model, state, M)
    return log_partition_from(em.phi, em.layout, model.effective_transitions())


def viterbi(model: CrfModel, state: EncoderState, M: int | None = None, scheme=Scheme.TARGET_FIRST):
    """Highest-scoring tag sequence and its score."""
    em = _lattice(model, state, M)
    path, score = viterbi_from(em.phi, em.layout, model.effective_transitions())
    tags = tuple(em.layout.tag_at(c) for c in path)
    return TagSequence(tags, Scheme.parse(scheme), em.layout.M), score


def check_sequence(model: CrfModel, seq: TagSequence, n: int) -> None:
    if len(seq.tags) != n:
        raise InvalidSequence(f"sequence of length {len(seq.tags)} for a sentence of length {n}")
    M = seq.max_offset
    if M > model.config.max_offset:
        raise InvalidSequence(f"sequence M={M} exceeds model M={model.config.max_offset}")
    for i, tag in enumerate(seq.tags):
        if tag.carries_triplet:
            if tag.j > tag.k or max(abs(tag.j), abs(tag.k)) > M or i + tag.j < 0 or i + tag.k >= n:
                raise InvalidSequence(f"{tag} is not admissible at position {i}")
    if model.config.structural_mask and not bioes_ok(seq.subtags):
        raise InvalidSequence(f"sequence {seq} violates the BIOES automaton")


def sequence_score(model: CrfModel, state: EncoderState, seq: TagSequence) -> float:
    """Transition scores over sub-tags (with START/STOP) plus every emission score."""
    n = state.n
    check_sequence(model, seq, n)
    trans = model.effective_transitions()
    subs = (START,) + seq.subtags + (STOP,)
    total = sum(float(trans[a, b]) for a, b in zip(subs, subs[1:]))
    return total + sum(factor_scores(model, state, i, tag) for i, tag in enumerate(seq.tags))


def log_prob(model: CrfModel, state: EncoderState, seq: TagSequence) -> float:
    return sequence_score(model, state, seq) - log_partition(model, state, seq.max_offset)


def count_sequences(n: int, M: int, mask: bool = True) -> int:
    """Number of sequences in the tag lattice (exact integer)."""
    allowed = np.ones((NUM_SUBTAGS + 2, NUM_SUBTAGS + 2), dtype=object)
    if mask:
        allowed[:] = 0
        for src, dsts in ALLOWED.items():
            for dst in dsts:
                allowed[src, dst] = 1
    counts = None
    for i in range(n):
        P = len(offset_pairs(n, i, M))
        sizes = [3 * P, 1, 1, 1, 3 * P]  # B, I, O, E, S
        if counts is None:
            counts = [sizes[s] * allowed[START, s] for s in range(NUM_SUBTAGS)]
        else:
            counts = [
                sizes[s] * sum(counts[u] * allowed[u, s] for u in range(NUM_SUBTAGS))
                for s in range(NUM_SUBTAGS)
            ]
    return int(sum(counts[s] * allowed[s, STOP] for s in range(NUM_SUBTAGS)))


def oracle_paths(
    model: CrfModel,
    state: EncoderState,
    M: int | None = None,
    cap: int = 2_000_000,
) -> tuple[list[tuple], np.ndarray, np.ndarray]:
    """Every admissible sequence as a row of per-position tag indices, with its score.

    Scores come from :func:`factor_scores` cell by cell and never touch the
    vectorized lattice, so this is an independent check on it.  Rows are in
    lexicographic canonical order.  Returns ``(tagsets, paths, scores)``.
    """
    n = state.n
    M = model.config.max_offset if M is None else M
    mask = model.config.structural_mask
    total = count_sequences(n, M, mask)
    if total > cap:
        raise TooManySequences(f"{total} sequences exceed the cap of {cap}")
    trans = model.effective_transitions()
    tagsets = [tuple(enumerate_tagset(n, i, M)) for i in range(n)]
    paths = np.zeros((1, 0), dtype=np.int32)
    scores = np.zeros(1)
    last = np.array([START])
    for i, tags in enumerate(tagsets):
        subs = np.array([t.sub for t in tags])
        phi = np.array([factor_scores(model, state, i, t) for t in tags])
        step = trans[last][:, subs]
        keep = np.isfinite(step) if mask else np.ones(step.shape, dtype=bool)
        rows, cols = np.nonzero(keep)
        scores = scores[rows] + step[rows, cols] + phi[cols]
        paths = np.concatenate([paths[rows], cols[:, None].astype(np.int32)], axis=1)
        last = subs[cols]
    stop = trans[last, STOP]
    keep = np.isfinite(stop)
    return tagsets, paths[keep], scores[keep] + stop[keep]


def oracle_enumerate(
    model: CrfModel,
    state: EncoderState,
    M: int | None = None,
    cap: int = 2_000_000,
    scheme=Scheme.TARGET_FIRST,
) -> list[tuple[TagSequence, float]]:
    """Every admissible sequence with its score (see :func:`oracle_paths`)."""
    M = model.config.max_offset if M is None else M
    tagsets, paths, scores = oracle_paths(model, state, M, cap)
    scheme = Scheme.parse(scheme)
    return [
        (TagSequence(tuple(tagsets[i][c] for i, c in enumerate(row)), scheme, M), float(sc))
        for row, sc in zip(paths, scores)
    ]


def oracle_best(paths: np.ndarray, scores: np.ndarray) -> tuple[int, float]:
    """Row of the best path, ties going where Viterbi's rule sends them.

    Viterbi backtracks from the last position taking the first canonical tag
    at each max, which amounts to the smallest row compared from the last
    position backwards.
    """
    best = scores.max()
    tied = np.flatnonzero(scores == best)
    # lexsort keys: last key is primary, so pass columns left to right
    order = np.lexsort(paths[tied].T)
    return int(tied[order[0]]), float(best)


def oracle_argmax(results: list[tuple[TagSequence, float]]) -> tuple[TagSequence, float]:
    best = max(score for _, score in results)
    tied = [seq for seq, score in results if score == best]
    return min(tied, key=lambda s: [t.sort_key() for t in reversed(s.tags)]), best
