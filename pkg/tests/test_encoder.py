import numpy as np
import pytest

from tripletag.checks import random_model, random_tokens
from tripletag.encoder import (
    CrfModel,
    ModelConfig,
    Vocabulary,
    backward,
    embed,
    emission_scores,
    factor_scores,
    lattice_layout,
    offset_score,
    read_embeddings,
    run_encoder,
    segment_repr,
)
from tripletag.errors import IndexOutOfRange, StaleTape, TagWindowOutOfBounds
from tripletag.tagging import Sentiment, Tag, S, B, enumerate_tagset


def _small(rng, **kw):
    cfg = ModelConfig(embed_dim=4, hidden=3, offset_dim=2, max_offset=2, dropout=0.0, **kw)
    return CrfModel.init(Vocabulary(["a", "b", "c"]), cfg, rng)


def test_embed_known_and_unknown(rng):
    vocab = Vocabulary(["good", "food"])
    cfg = ModelConfig(embed_dim=3, hidden=2, offset_dim=2, max_offset=1)
    vec = np.array([1.0, 2.0, 3.0])
    model = CrfModel.init(vocab, cfg, rng, pretrained={"good": vec})
    ids, out, mask = embed(model, ["good", "zzz"])
    assert ids.tolist() == [2, 1] and mask is None
    np.testing.assert_array_equal(out[0], vec)
    np.testing.assert_array_equal(out[1], model.params["embedding"][1])


def test_init_ranges(rng):
    model = _small(rng)
    for name in ("embedding", "offset_table"):
        assert np.abs(model.params[name]).max() <= 0.1
    assert not model.params["transitions"].any()


def test_read_embeddings(tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("good 0.1 0.2\nbad -1 2\nother 3 3\n")
    vecs, dim = read_embeddings(path, Vocabulary(["good", "bad"]))
    assert dim == 2
    assert set(vecs) == {"good", "bad"}
    np.testing.assert_allclose(vecs["bad"], [-1.0, 2.0])


def test_single_token_has_no_context(rng):
    model = _small(rng)
    a = run_encoder(model, ["a"])
    b = run_encoder(model, ["a"])
    np.testing.assert_array_equal(a.fwd, b.fwd)
    np.testing.assert_array_equal(a.bwd, b.bwd)
    assert a.fwd.shape == (2, 3) and a.bwd.shape == (3, 3)
    assert not a.fwd[0].any() and not a.bwd[2].any()


def test_zero_weights_zero_states(rng):
    model = _small(rng)
    for k in model.params:
        model.params[k][...] = 0.0
    st = run_encoder(model, ["a", "b", "c"])
    assert not st.fwd.any() and not st.bwd.any()
    assert all(factor_scores(model, st, i, t) == 0.0 for i in range(3) for t in enumerate_tagset(3, i, 2))


def test_segment_repr_properties(rng):
    model = _small(rng)
    st = run_encoder(model, ["a", "b", "c", "a", "b"])
    H, n = 3, 5
    full = segment_repr(st, 1, n)
    np.testing.assert_array_equal(full, np.concatenate([st.fwd[n], st.bwd[1]]))
    one = segment_repr(st, 3, 3)
    np.testing.assert_array_equal(one, np.concatenate([st.fwd[3] - st.fwd[2], st.bwd[3] - st.bwd[4]]))
    left, right, both = segment_repr(st, 1, 2), segment_repr(st, 3, 4), segment_repr(st, 1, 4)
    np.testing.assert_allclose(left[:H] + right[:H], both[:H], atol=1e-14)
    with pytest.raises(IndexOutOfRange):
        segment_repr(st, 0, 2)


def test_offset_score_uses_min_row(rng):
    model = _small(rng)
    model.params["f_r.W"][...] = 0.0
    assert offset_score(model, -2, 1) == pytest.approx(model.params["f_r.b"][0])
    model = _small(rng)
    row = model.params["offset_table"][1 + 2]
    want = model.params["f_r.W"][0] @ row + model.params["f_r.b"][0]
    assert offset_score(model, 1, 2) == pytest.approx(want)


def test_factor_scores_window_check(rng):
    model = _small(rng)
    st = run_encoder(model, ["a", "b"])
    with pytest.raises(TagWindowOutOfBounds):
        factor_scores(model, st, 0, Tag(S, Sentiment.POSITIVE, -1, -1))
    with pytest.raises(IndexOutOfRange):
        factor_scores(model, st, 2, Tag(B, Sentiment.POSITIVE, 0, 0))


def test_vectorized_emissions_match_scalar(rng):
    for n, M in [(1, 2), (4, 1), (7, 3)]:
        model = random_model(rng, 6, M, 5)
        st = run_encoder(model, random_tokens(rng, n))
        em = emission_scores(model, st)
        lay = em.layout
        for c in range(lay.num_cells):
            i = int(lay.cell_pos[c])
            assert em.phi[c] == pytest.approx(factor_scores(model, st, i, lay.tag_at(c)), abs=1e-12)
        lean = emission_scores(model, st, keep_segments=False)
        np.testing.assert_allclose(lean.phi, em.phi, atol=1e-12)


def test_lattice_cell_roundtrip():
    lay = lattice_layout(5, 2)
    for i in range(5):
        for t in enumerate_tagset(5, i, 2):
            assert lay.tag_at(lay.cell_of(i, t)) == t


def test_backward_zero_upstream(rng):
    model = random_model(rng, 6, 2, 3)
    st = run_encoder(model, random_tokens(rng, 4))
    em = emission_scores(model, st)
    grads = backward(model, em, np.zeros_like(em.phi))
    assert all(not g.any() for g in grads.values())


def test_offset_gradient_touches_one_row(rng):
    model = random_model(rng, 6, 2, 3)
    st = run_encoder(model, random_tokens(rng, 4))
    em = emission_scores(model, st)
    dphi = np.zeros_like(em.phi)
    cell = em.layout.cell_of(1, Tag(B, Sentiment.NEUTRAL, 1, 2))
    dphi[cell] = 1.0
    grads = backward(model, em, dphi)
    touched = np.flatnonzero(np.abs(grads["offset_table"]).sum(axis=1))
    assert touched.tolist() == [1 + 2]


def test_stale_tape(rng):
    model = random_model(rng, 6, 2, 3)
    st = run_encoder(model, random_tokens(rng, 3))
    em = emission_scores(model, st)
    model.bump()
    with pytest.raises(StaleTape):
        backward(model, em, np.zeros_like(em.phi))
    em = emission_scores(model, run_encoder(model, random_tokens(rng, 3)), keep_segments=False)
    with pytest.raises(ValueError):
        backward(model, em, np.zeros_like(em.phi))


def test_dropout_only_with_rng(rng):
    model = random_model(rng, 6, 2, 3)
    model.config.dropout = 0.5
    toks = random_tokens(rng, 4)
    a, b = run_encoder(model, toks), run_encoder(model, toks)
    np.testing.assert_array_equal(a.fwd, b.fwd)
    c = run_encoder(model, toks, np.random.default_rng(0))
    d = run_encoder(model, toks, np.random.default_rng(0))
    np.testing.assert_array_equal(c.fwd, d.fwd)
    assert not np.array_equal(a.fwd, c.fwd)
