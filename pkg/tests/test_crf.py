import itertools
import math

import numpy as np
import pytest

from tripletag import crf
from tripletag.checks import random_model, random_tokens
from tripletag.encoder import CrfModel, ModelConfig, Vocabulary, run_encoder
from tripletag.errors import InvalidSequence
from tripletag.tagging import O, START, STOP, Scheme, TagSequence, bioes_ok, enumerate_tagset, validate


def _zero_model(M, mask=True, n_vocab=3):
    cfg = ModelConfig(embed_dim=2, hidden=2, offset_dim=2, max_offset=M, dropout=0.0, structural_mask=mask)
    return CrfModel.zeros(Vocabulary([f"w{q}" for q in range(n_vocab)]), cfg)


def _brute_count(n, M, mask):
    sets = [enumerate_tagset(n, i, M) for i in range(n)]
    total = 0
    for combo in itertools.product(*sets):
        if mask and not bioes_ok([t.sub for t in combo]):
            continue
        total += 1
    return total


def test_log_partition_single_token():
    st = run_encoder(_zero_model(2), ["w0"])
    assert crf.log_partition(_zero_model(2), st) == pytest.approx(math.log(4), abs=1e-12)
    off = _zero_model(2, mask=False)
    assert crf.log_partition(off, run_encoder(off, ["w0"])) == pytest.approx(math.log(9), abs=1e-12)


def test_log_prob_single_token():
    model = _zero_model(2)
    st = run_encoder(model, ["w0"])
    seq = TagSequence.parse("O", "t", 2)
    assert crf.log_prob(model, st, seq) == pytest.approx(-math.log(4), abs=1e-12)


def test_viterbi_tie_break_picks_o():
    model = _zero_model(2)
    seq, sc = crf.viterbi(model, run_encoder(model, ["w0"]))
    assert str(seq) == "O" and sc == 0.0


def test_viterbi_favours_o_when_rigged(rng):
    model = random_model(rng, 6, 2, 3)
    model.params["f_t.b"][O] = 1e3
    seq, _ = crf.viterbi(model, run_encoder(model, random_tokens(rng, 5)))
    assert seq.subtags == (O,) * 5


def test_sequence_score_expansion(rng):
    model = random_model(rng, 6, 1, 3)
    st = run_encoder(model, ["w1", "w2"])
    seq = TagSequence.parse("O O", "t", 1)
    T = model.params["transitions"]
    h = [np.concatenate([st.fwd[i + 1], st.bwd[i + 1]]) for i in range(2)]
    ft = [model.params["f_t.W"][O] @ x + model.params["f_t.b"][O] for x in h]
    want = T[START, O] + T[O, O] + T[O, STOP] + ft[0] + ft[1]
    assert crf.sequence_score(model, st, seq) == pytest.approx(want, abs=1e-12)


def test_sequence_score_zero_model():
    model = _zero_model(2)
    st = run_encoder(model, ["w0", "w1", "w2"])
    assert crf.sequence_score(model, st, TagSequence.parse("B^+_{1,2} E O", "t", 2)) == 0.0


def test_check_sequence_rejects_invalid():
    model = _zero_model(1)
    st = run_encoder(model, ["w0", "w1"])
    with pytest.raises(InvalidSequence):
        crf.log_prob(model, st, TagSequence.parse("O E", "t", 1))


@pytest.mark.parametrize("n,M,mask", [(1, 2, True), (2, 0, True), (3, 1, True), (3, 1, False), (4, 2, True), (2, 2, False)])
def test_count_sequences_matches_brute_force(n, M, mask):
    assert crf.count_sequences(n, M, mask) == _brute_count(n, M, mask)


def test_count_sequences_frozen():
    # independent brute-force enumeration, frozen
    assert crf.count_sequences(1, 2, True) == 4
    assert [crf.count_sequences(3, m, True) for m in range(4)] == [91, 2179, 7561, 7561]
    assert crf.count_sequences(7, 0, True) == 47956


def test_oracle_enumerate_small():
    model = _zero_model(2)
    st = run_encoder(model, ["w0"])
    res = crf.oracle_enumerate(model, st, 2)
    assert len(res) == 4
    assert all(score == 0.0 for _, score in res)
    for seq, _ in res:
        validate(seq)


def test_oracle_agreement_random(rng):
    for _ in range(25):
        n = int(rng.integers(1, 6))
        M = int(rng.integers(0, 3))
        mask = bool(rng.random() < 0.8)
        if crf.count_sequences(n, M, mask) > 50_000:
            continue
        model = random_model(rng, 6, M, 3, mask=mask)
        st = run_encoder(model, random_tokens(rng, n))
        res = crf.oracle_enumerate(model, st, M)
        scores = np.array([s for _, s in res])
        assert crf.log_partition(model, st, M) == pytest.approx(np.logaddexp.reduce(scores), abs=1e-9)
        best_seq, best = crf.oracle_argmax(res)
        seq, vs = crf.viterbi(model, st, M)
        assert vs == pytest.approx(best, abs=1e-9)
        assert seq.tags == best_seq.tags
        for s, sc in res[:5]:
            assert crf.sequence_score(model, st, s) == pytest.approx(sc, abs=1e-10)


def test_marginals_sum_to_one_per_position(rng):
    model = random_model(rng, 6, 2, 4)
    st = run_encoder(model, random_tokens(rng, 6))
    em = crf.emission_scores(model, st)
    log_z, marg, counts = crf.forward_backward(em.phi, em.layout, model.effective_transitions())
    per_pos = np.bincount(em.layout.cell_pos, weights=marg)
    np.testing.assert_allclose(per_pos, 1.0, atol=1e-12)
    assert counts[START].sum() == pytest.approx(1.0)
    assert counts[:, STOP].sum() == pytest.approx(1.0)
    assert log_z == pytest.approx(crf.log_partition(model, st), abs=1e-12)


def test_viterbi_decodes_under_scheme(rng):
    model = random_model(rng, 6, 2, 3)
    seq, _ = crf.viterbi(model, run_encoder(model, random_tokens(rng, 4)), scheme=Scheme.OPINION_FIRST)
    assert seq.scheme is Scheme.OPINION_FIRST
    validate(seq)
