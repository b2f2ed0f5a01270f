"""Verification harnesses: codec round trips, oracle equivalence, gradient
checks, trainability, scaling and evaluation properties.

Each ``check_*`` function takes its scale as arguments and returns a
:class:`CheckResult`.  The CLI ``selfcheck`` runs them small; the acceptance
tests run them at full size.
"""
from __future__ import annotations

import gc
import time
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import crf
from .corpus import CorpusRecord
from .encoder import CrfModel, ModelConfig, Vocabulary, emission_scores, factor_scores, run_encoder
from .evaluation import MatchMode, ensemble_merge, score, triplets_overlap
from .tagging import (
    ALLOWED,
    START,
    STOP,
    Scheme,
    SelfOverlapWarning,
    Sentiment,
    Span,
    TagSequence,
    Triplet,
    decode,
    encode,
    enumerate_tagset,
    offset_pairs,
)
from .training import TrainConfig, evaluate_f1, loss_and_grads, nll_loss, train


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# -- random generators -------------------------------------------------------

def random_triplets(rng, n: int, M: int, scheme: Scheme, density: float = 0.35) -> set[Triplet]:
    """A random triplet set satisfying the encoder's preconditions."""
    out = set()
    i = 0
    while i < n:
        if rng.random() < density:
            length = int(rng.integers(1, n - i + 1)) if rng.random() < 0.3 else 1
            end = i + length - 1
            pairs = offset_pairs(n, i, M)
            j, k = pairs[int(rng.integers(len(pairs)))]
            primary, secondary = Span(i, end), Span(i + j, i + k)
            eps = Sentiment(int(rng.integers(3)))
            if scheme is Scheme.TARGET_FIRST:
                out.add(Triplet(primary, secondary, eps))
            else:
                out.add(Triplet(secondary, primary, eps))
            i = end + 1
        else:
            i += 1
    return out


def random_tag_sequence(rng, n: int, M: int, scheme: Scheme) -> TagSequence:
    """A random well-formed tag sequence, built by walking the BIOES automaton."""
    while True:
        tags = []
        prev = START
        for i in range(n):
            options = [t for t in enumerate_tagset(n, i, M) if t.sub in ALLOWED[prev]]
            # the walk must still be able to finish: from B/I we need room for an E
            if i == n - 1:
                options = [t for t in options if STOP in ALLOWED[t.sub]]
            if not options:
                break
            light = [t for t in options if not t.carries_triplet]
            heavy = [t for t in options if t.carries_triplet]
            pool = heavy if heavy and (not light or rng.random() < 0.4) else light
            tag = pool[int(rng.integers(len(pool)))]
            tags.append(tag)
            prev = tag.sub
        if len(tags) == n:
            return TagSequence(tuple(tags), scheme, M)


def random_model(rng, n_vocab: int, M: int, hidden: int, embed_dim: int = 4, offset_dim: int = 3,
                 mask: bool = True, scale: float = 0.5, **flags) -> CrfModel:
    vocab = Vocabulary([f"w{q}" for q in range(n_vocab)])
    cfg = ModelConfig(embed_dim=embed_dim, hidden=hidden, offset_dim=offset_dim, max_offset=M,
                      dropout=0.0, structural_mask=mask, **flags)
    model = CrfModel.init(vocab, cfg, rng)
    for name, p in model.params.items():
        p += rng.normal(scale=scale, size=p.shape)
    return model


def random_tokens(rng, n: int, n_vocab: int = 6) -> list[str]:
    return [f"w{int(q)}" for q in rng.integers(0, n_vocab, size=n)]


# -- checks --------------------------------------------------------------------

@_timed
def check_codec(count: int = 10_000, seed: int = 0, max_n: int = 12, max_m: int = 4) -> CheckResult:
    """decode(encode(T)) == T and encode(decode(s)) == s on random inputs, both schemes."""
    rng = np.random.default_rng(seed)
    failures = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SelfOverlapWarning)
        for it in range(count):
            scheme = (Scheme.TARGET_FIRST, Scheme.OPINION_FIRST)[it % 2]
            n = int(rng.integers(1, max_n + 1))
            M = int(rng.integers(0, max_m + 1))
            T = random_triplets(rng, n, M, scheme)
            seq = encode(n, T, scheme, M)
            if decode(seq) != T or encode(n, decode(seq), scheme, M) != seq:
                failures += 1
            s = random_tag_sequence(rng, n, M, scheme)
            if encode(n, decode(s), scheme, M) != s:
                failures += 1
    return CheckResult("codec bijection", failures == 0,
                       f"{count} triplet sets + {count} tag sequences, {failures} failures")


EXAMPLE_TOKENS = "food was so so but excited to see many vegan options".split()
EXAMPLE_TRIPLETS = {
    Triplet(Span(0, 0), Span(2, 3), Sentiment.NEUTRAL),
    Triplet(Span(9, 10), Span(5, 5), Sentiment.POSITIVE),
}
EXAMPLE_TAGS_T = "S^0_{2,3} O O O O O O O O B^+_{-4,-4} E"
EXAMPLE_TAGS_O = "O O B^0_{-2,-2} E O S^+_{4,5} O O O O O"


@_timed
def check_worked_examples() -> CheckResult:
    t = encode(EXAMPLE_TOKENS, EXAMPLE_TRIPLETS, Scheme.TARGET_FIRST, 6)
    o = encode(EXAMPLE_TOKENS, EXAMPLE_TRIPLETS, Scheme.OPINION_FIRST, 6)
    ok = str(t) == EXAMPLE_TAGS_T and str(o) == EXAMPLE_TAGS_O
    ok = ok and decode(TagSequence.parse(EXAMPLE_TAGS_T, "t", 6)) == EXAMPLE_TRIPLETS
    ok = ok and decode(TagSequence.parse(EXAMPLE_TAGS_O, "o", 6)) == EXAMPLE_TRIPLETS
    return CheckResult("worked examples", ok, f"t: {t} | o: {o}")


def _tractable_shape(rng, max_n, max_m, max_h, cap, mask_off_rate):
    while True:
        n = int(rng.integers(1, max_n + 1))
        M = int(rng.integers(0, max_m + 1))
        mask = rng.random() >= mask_off_rate
        if crf.count_sequences(n, M, mask) <= cap:
            return n, M, int(rng.integers(1, max_h + 1)), mask


@lru_cache(maxsize=4)
def inference_sweep(count: int = 1000, seed: int = 0, max_n: int = 7, max_m: int = 3, max_h: int = 8,
                    cap: int = 50_000, mask_off_rate: float = 0.2) -> dict:
    """Compare Viterbi, the forward algorithm and log_prob with exhaustive enumeration.

    Instances are drawn uniformly over (n, M, H, mask) and redrawn until the
    lattice holds at most ``cap`` sequences.  Cached, so the exactness and
    normalization checks share one sweep.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    out = {"max_err": 0.0, "z_err": 0.0, "norm_err": 0.0, "logp_err": 0.0, "argmax_fail": 0,
           "lengths": set(), "masks": set()}
    for _ in range(count):
        n, M, H, mask = _tractable_shape(rng, max_n, max_m, max_h, cap, mask_off_rate)
        out["lengths"].add(n)
        out["masks"].add(mask)
        model = random_model(rng, 6, M, H, mask=mask)
        state = run_encoder(model, random_tokens(rng, n))
        tagsets, paths, scores = crf.oracle_paths(model, state, M)
        row, best = crf.oracle_best(paths, scores)
        seq, vscore = crf.viterbi(model, state, M)
        log_z = crf.log_partition(model, state, M)
        out["max_err"] = max(out["max_err"], abs(vscore - best))
        out["z_err"] = max(out["z_err"], abs(log_z - float(np.logaddexp.reduce(scores))))
        if list(seq.tags) != [tagsets[i][c] for i, c in enumerate(paths[row])]:
            out["argmax_fail"] += 1
        out["norm_err"] = max(out["norm_err"], abs(float(np.exp(scores - log_z).sum()) - 1.0))
        # spot-check the public log_prob on a few enumerated sequences
        for q in rng.integers(0, len(scores), size=2):
            s = TagSequence(tuple(tagsets[i][c] for i, c in enumerate(paths[q])), Scheme.TARGET_FIRST, M)
            out["logp_err"] = max(out["logp_err"], abs(crf.log_prob(model, state, s) - (scores[q] - log_z)))
    out["count"] = count
    out["seconds"] = time.perf_counter() - t0
    return out


def check_inference(count: int = 1000, seed: int = 0, tol: float = 1e-9, **kw) -> CheckResult:
    r = inference_sweep(count, seed, **kw)
    ok = r["max_err"] <= tol and r["z_err"] <= tol and r["argmax_fail"] == 0
    return CheckResult(
        "inference exactness",
        ok,
        f"{r['count']} models, n in {sorted(r['lengths'])}, mask in {sorted(r['masks'])}: "
        f"max|viterbi-oracle|={r['max_err']:.2e}, max|logZ-oracle|={r['z_err']:.2e}, "
        f"argmax mismatches={r['argmax_fail']}",
        r["seconds"],
    )


def check_normalization(count: int = 1000, seed: int = 0, tol: float = 1e-9, **kw) -> CheckResult:
    r = inference_sweep(count, seed, **kw)
    ok = r["norm_err"] <= tol and r["logp_err"] <= tol
    return CheckResult(
        "normalization",
        ok,
        f"{r['count']} models: max|sum exp(log p) - 1|={r['norm_err']:.2e}, "
        f"max|log_prob - (score - logZ)|={r['logp_err']:.2e}",
        r["seconds"],
    )


def _random_instance(rng, scheme):
    while True:
        n = int(rng.integers(2, 7))
        M = int(rng.integers(1, 4))
        T = random_triplets(rng, n, M, scheme, density=0.5)
        if T:
            return n, M, T


@_timed
def check_gradients(count: int = 20, seed: int = 0, step: float = 1e-4, tol: float = 1e-5,
                    coords_per_group: int = 24) -> CheckResult:
    """End-to-end NLL gradient against central differences on random instances.

    Every parameter group is probed at up to ``coords_per_group`` coordinates
    (all of them for small groups), always including the touched embedding
    rows.  Half the instances run with dropout, replaying the same masks.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_at = ""
    probes = 0
    warnings.simplefilter("ignore", SelfOverlapWarning)
    for it in range(count):
        scheme = (Scheme.TARGET_FIRST, Scheme.OPINION_FIRST)[it % 2]
        n, M, T = _random_instance(rng, scheme)
        H = int(rng.integers(2, 7))
        model = random_model(rng, 6, M, H, embed_dim=4, offset_dim=3, scale=0.3,
                             use_offset_features=bool(rng.random() < 0.8),
                             use_opinion_features=bool(rng.random() < 0.8))
        drop = it % 2 == 1
        model.config.dropout = 0.3 if drop else 0.0
        rec = CorpusRecord(random_tokens(rng, n), sorted(T))
        dseed = int(rng.integers(1 << 30))

        def loss():
            r = np.random.default_rng(dseed) if drop else None
            if r is None:
                return nll_loss(model, [rec], scheme)
            return loss_and_grads(model, [rec], scheme, r)[0]

        _, grads = loss_and_grads(model, [rec], scheme, np.random.default_rng(dseed) if drop else None)
        ids = set(model.vocab.ids(rec.tokens).tolist())
        for name, p in model.params.items():
            flat = p.reshape(-1)
            if name == "embedding":
                cand = [r * p.shape[1] + c for r in ids for c in range(p.shape[1])]
                cand += list(range(p.shape[1]))  # pad row: gradient must be zero
            else:
                cand = list(range(flat.size))
            if len(cand) > coords_per_group:
                cand = list(rng.choice(cand, size=coords_per_group, replace=False))
            g = grads[name].reshape(-1)
            for q in cand:
                old = flat[q]
                flat[q] = old + step
                lp = loss()
                flat[q] = old - step
                lm = loss()
                flat[q] = old
                fd = (lp - lm) / (2 * step)
                err = abs(g[q] - fd) / max(1.0, abs(fd))
                probes += 1
                if err > worst:
                    worst, worst_at = err, f"{name}[{q}]"
    return CheckResult("gradient correctness", worst < tol,
                       f"{count} instances, {probes} probes, max rel err {worst:.2e} at {worst_at}")


@_timed
def check_trainability(seed: int = 0, max_epochs: int = 200, hidden: int = 32, M: int = 3,
                       extra_epochs: int = 10, dev_target: float = 0.9) -> CheckResult:
    """Overfit the synthetic corpus, hit the dev target, and reproduce bit for bit."""
    from .synthetic import generate

    train_set = generate(20, seed=seed * 2 + 1)
    dev_set = generate(10, seed=seed * 2 + 2)
    cfg = TrainConfig(scheme="t", max_offset=M, epochs=max_epochs, hidden=hidden, embed_dim=32,
                      offset_dim=16, dropout=0.0, lr=5e-3, seed=seed)

    def run():
        reached = []

        def cb(epoch, model, history):
            if not reached and evaluate_f1(model, train_set, "t") == 1.0:
                reached.append(epoch)
            return bool(reached) and epoch >= reached[0] + extra_epochs

        ckpt = train(cfg, train_set, dev_set, callback=cb)
        return ckpt, (reached[0] if reached else None)

    a, reached_a = run()
    b, reached_b = run()
    same = (
        all(np.array_equal(a.model.params[k], b.model.params[k]) for k in a.model.params)
        and [h["dev_f1"] for h in a.history] == [h["dev_f1"] for h in b.history]
        and a.epoch == b.epoch
    )
    train_f1 = evaluate_f1(a.model, train_set, "t")
    ok = reached_a is not None and reached_a <= max_epochs and a.dev_f1 >= dev_target and same
    return CheckResult(
        "trainability",
        ok,
        f"train F1=1.0 at epoch {reached_a}; best-dev epoch {a.epoch} dev F1={a.dev_f1:.3f} "
        f"(train F1 there {train_f1:.3f}); reproducible={same}",
    )


def _decode_setup(n: int, M: int, hidden: int, embed_dim: int, seed: int):
    rng = np.random.default_rng(seed)
    model = random_model(rng, 50, M, hidden, embed_dim=embed_dim, offset_dim=100, scale=0.0)
    state = run_encoder(model, random_tokens(rng, n, 50))
    trans = model.effective_transitions()

    def run():
        em = emission_scores(model, state, keep_segments=False)
        crf.viterbi_from(em.phi, em.layout, trans)

    run()
    return run


def decode_times(shapes, hidden: int = 300, embed_dim: int = 300, reps: int = 21, seed: int = 0) -> list[float]:
    """Wall time of lattice scoring plus Viterbi for each (n, M), encoder excluded.

    Shapes are timed round-robin so machine drift hits all of them alike; the
    minimum over repetitions is reported.
    """
    runs = [_decode_setup(n, M, hidden, embed_dim, seed) for n, M in shapes]
    best = [float("inf")] * len(runs)
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(reps):
            for q, run in enumerate(runs):
                t0 = time.perf_counter()
                run()
                best[q] = min(best[q], time.perf_counter() - t0)
    finally:
        if was_enabled:
            gc.enable()
    return best


@_timed
def check_scaling(hidden: int = 300, reps: int = 21, attempts: int = 3,
                  m_band=(2.5, 6.5), n_band=(1.6, 2.6)) -> CheckResult:
    """Decode-time ratios; the median over independent attempts is judged."""
    ms, ns = [], []
    for _ in range(attempts):
        t64_4, t64_8, t128_4 = decode_times([(64, 4), (64, 8), (128, 4)], hidden, reps=reps)
        ms.append(t64_8 / t64_4)
        ns.append(t128_4 / t64_4)
    rm, rn = float(np.median(ms)), float(np.median(ns))
    ok = m_band[0] <= rm <= m_band[1] and n_band[0] <= rn <= n_band[1]
    return CheckResult(
        "complexity scaling",
        ok,
        f"time(M=8)/time(M=4)={rm:.2f} in {m_band}; time(n=128)/time(n=64)={rn:.2f} in {n_band} "
        f"(attempts: {', '.join(f'{a:.2f}/{b:.2f}' for a, b in zip(ms, ns))})",
    )


def _random_pred(rng, gold: set[Triplet], n: int) -> set[Triplet]:
    out = set()
    for t in gold:
        r = rng.random()
        if r < 0.3:
            out.add(t)
        elif r < 0.6:
            # nudge one boundary by one token
            tgt, opn = t.target, t.opinion
            if rng.random() < 0.5:
                tgt = Span(max(0, tgt.start - 1), tgt.end) if rng.random() < 0.5 else Span(tgt.start, min(n - 1, tgt.end + 1))
            else:
                opn = Span(max(0, opn.start - 1), opn.end) if rng.random() < 0.5 else Span(opn.start, min(n - 1, opn.end + 1))
            out.add(Triplet(tgt, opn, t.sentiment))
    for _ in range(int(rng.integers(0, 3))):
        a = int(rng.integers(n))
        b = int(rng.integers(n))
        out.add(Triplet(Span(a, a), Span(b, b), Sentiment(int(rng.integers(3)))))
    return out


def _random_gold(rng, n):
    scheme = Scheme.TARGET_FIRST if rng.random() < 0.5 else Scheme.OPINION_FIRST
    return random_triplets(rng, n, n, scheme, density=0.4)


@_timed
def check_eval_semantics(count: int = 1000, seed: int = 0) -> CheckResult:
    g = [Triplet(Span(9, 10), Span(5, 5), Sentiment.POSITIVE)]
    off_t = [Triplet(Span(10, 10), Span(5, 5), Sentiment.POSITIVE)]
    off_o = [Triplet(Span(9, 10), Span(5, 6), Sentiment.POSITIVE)]
    unit = [
        score([g], [off_t], MatchMode.EXACT).matched == 0,
        score([g], [off_t], MatchMode.PARTIAL_TARGET).matched == 1,
        score([g], [off_t], MatchMode.PARTIAL_OPINION).matched == 0,
        score([g], [off_o], MatchMode.EXACT).matched == 0,
        score([g], [off_o], MatchMode.PARTIAL_OPINION).matched == 1,
        score([g], [off_o], MatchMode.PARTIAL_TARGET).matched == 0,
    ]
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(count):
        sents = int(rng.integers(1, 5))
        ns = [int(rng.integers(2, 12)) for _ in range(sents)]
        gold = [_random_gold(rng, n) for n in ns]
        pred = [_random_pred(rng, gs, n) for gs, n in zip(gold, ns)]
        e = score(gold, pred, MatchMode.EXACT)
        pt = score(gold, pred, MatchMode.PARTIAL_TARGET)
        po = score(gold, pred, MatchMode.PARTIAL_OPINION)
        if not (e.matched <= pt.matched and e.matched <= po.matched):
            violations += 1
        for prf in (e, pt, po):
            if prf.precision + prf.recall > 0 and abs(prf.f1 - 2 * prf.precision * prf.recall / (prf.precision + prf.recall)) > 1e-12:
                violations += 1
    ok = all(unit) and violations == 0
    return CheckResult("evaluation semantics", ok,
                       f"{sum(unit)}/{len(unit)} off-by-one unit cases; {violations} monotonicity violations in {count} pairs")


@_timed
def check_ensemble(count: int = 1000, seed: int = 0) -> CheckResult:
    """Merged recall never drops; it rises exactly when a gold-drawn donor triplet is admitted."""
    rng = np.random.default_rng(seed)
    bad = 0
    for it in range(count):
        sents = int(rng.integers(1, 5))
        ns = [int(rng.integers(2, 12)) for _ in range(sents)]
        gold = [_random_gold(rng, n) for n in ns]
        base = [_random_pred(rng, gs, n) for gs, n in zip(gold, ns)]
        if it % 2:
            donor = [_random_pred(rng, gs, n) for gs, n in zip(gold, ns)]
        else:
            donor = [{t for t in gs if rng.random() < 0.5} for gs in gold]
        merged = ensemble_merge(base, donor)
        admitted = any(
            any(not any(triplets_overlap(d, b) for b in bs) for d in ds) for bs, ds in zip(base, donor)
        )
        r0 = score(gold, base).recall
        r1 = score(gold, merged).recall
        if r1 < r0 or any(not set(b) <= m for b, m in zip(base, merged)):
            bad += 1
        if not admitted and (r1 != r0 or merged != [set(b) for b in base]):
            bad += 1
        if it % 2 == 0 and admitted and not r1 > r0:
            bad += 1
    return CheckResult("ensemble monotonicity", bad == 0, f"{count} random prediction pairs, {bad} violations")


@_timed
def check_ablation(count: int = 50, seed: int = 0) -> CheckResult:
    """Switching off offset / opinion-span features removes exactly those terms."""
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(count):
        n = int(rng.integers(2, 8))
        M = int(rng.integers(1, 4))
        tokens = random_tokens(rng, n)
        base = random_model(rng, 6, M, 4)
        params = {k: v.copy() for k, v in base.params.items()}

        def build(**flags):
            cfg = ModelConfig(embed_dim=4, hidden=4, offset_dim=3, max_offset=M, dropout=0.0, **flags)
            return CrfModel(base.vocab, cfg, {k: v.copy() for k, v in params.items()})

        full = build()
        no_off = build(use_offset_features=False)
        no_opn = build(use_opinion_features=False)
        s_full = run_encoder(full, tokens)
        s_off = run_encoder(no_off, tokens)
        s_opn = run_encoder(no_opn, tokens)
        phi_off = emission_scores(no_off, s_off).phi.copy()
        # exchange two offset-table rows: scores must not move
        r1, r2 = rng.choice(2 * M + 1, size=2, replace=False)
        no_off.params["offset_table"][[r1, r2]] = no_off.params["offset_table"][[r2, r1]]
        no_off.params["f_r.W"] += 1.0
        if not np.array_equal(emission_scores(no_off, run_encoder(no_off, tokens)).phi, phi_off):
            bad += 1
        # same window reached from two positions: once the position-local
        # terms are removed the remainder depends on the window alone
        by_window: dict[tuple, list] = {}
        for i in range(n):
            local = np.concatenate([s_off.fwd[i + 1], s_off.bwd[i + 1]])
            for tag in enumerate_tagset(n, i, M):
                if not tag.carries_triplet:
                    continue
                eps = int(tag.sentiment)
                rest = factor_scores(no_off, s_off, i, tag)
                rest -= float(params["f_t.W"][tag.sub] @ local + params["f_t.b"][tag.sub])
                rest -= float(params["f_s.W"][eps, s_off.fwd.shape[1] * 2:] @ s_off.bwd[i + 1])
                by_window.setdefault((i + tag.j, i + tag.k, eps), []).append(rest)
        if any(max(v) - min(v) > 1e-12 for v in by_window.values()):
            bad += 1
        for i in range(n):
            for tag in enumerate_tagset(n, i, M):
                f = factor_scores(full, s_full, i, tag)
                fo = 0.0
                fr = 0.0
                if tag.carries_triplet:
                    from .encoder import offset_score, segment_repr

                    g = segment_repr(s_full, i + tag.j + 1, i + tag.k + 1)
                    fo = float(params["f_o.W"][0] @ g + params["f_o.b"][0])
                    fr = offset_score(full, tag.j, tag.k)
                if abs(factor_scores(no_opn, s_opn, i, tag) - (f - fo)) > 1e-12:
                    bad += 1
                if abs(factor_scores(no_off, s_off, i, tag) - (f - fr)) > 1e-12:
                    bad += 1
    return CheckResult("ablation flags", bad == 0, f"{count} models, {bad} violations")


def run_all(scale: str = "quick", seed: int = 0) -> list[CheckResult]:
    if scale == "full":
        return [
            check_codec(10_000, seed), check_worked_examples(), check_inference(1000, seed), check_normalization(1000, seed),
            check_gradients(20, seed), check_trainability(seed), check_scaling(),
            check_eval_semantics(1000, seed), check_ensemble(1000, seed), check_ablation(50, seed),
        ]
    return [
        check_codec(500, seed), check_worked_examples(), check_inference(60, seed), check_normalization(60, seed),
        check_gradients(3, seed, coords_per_group=8), check_eval_semantics(200, seed),
        check_ensemble(200, seed), check_ablation(10, seed),
    ]
