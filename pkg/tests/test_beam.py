from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbrvq import (
    Codebook,
    QuantizerSpec,
    beam_macs_factor,
    beam_paths,
    encode_frame,
    encode_frame_beam,
    encode_frame_gb,
    encode_frame_greedy,
    nearest,
)
from gbrvq._search import beam_batch
from conftest import tiny_model
from oracles import brute_force_paths, formula_beam_factor, naive_sq_dist

# Layer 0 offers a near miss (0.9, 0) and a farther (1.5, 0); only the farther
# one can be completed exactly by layer 1's (-1.5, 0).
ADVERSARIAL = [
    np.array([[0.9, 0], [1.5, 0], [10, 10], [-10, 10]]),
    np.array([[-1.5, 0], [5, 5], [5, -5], [-5, 5]]),
]


def _err(r):
    return float(np.dot(r, r))


def test_adversarial_instance_oracle_first():
    x = [0.0, 0.0]
    best_err, best_codes = brute_force_paths(ADVERSARIAL, x)
    assert best_codes == (1, 0) and best_err == 0.0
    g_codes, g_r = encode_frame_greedy([Codebook(c) for c in ADVERSARIAL], x)
    assert g_codes.tolist() == [0, 0]
    assert _err(g_r) == pytest.approx(0.36)
    b_codes, b_r = encode_frame_beam([Codebook(c) for c in ADVERSARIAL], x, 4)
    assert tuple(b_codes.tolist()) == best_codes
    assert _err(b_r) == best_err < _err(g_r)
    b2, _ = encode_frame_beam([Codebook(c) for c in ADVERSARIAL], x, 2)
    assert tuple(b2.tolist()) == best_codes


def test_single_layer_beam_is_nearest(rng):
    cb = Codebook(rng.standard_normal((8, 3)))
    for k in (1, 2, 5, 20):
        for x in rng.standard_normal((10, 3)):
            codes, r = encode_frame_beam([cb], x, k)
            m = nearest(cb, x)
            assert codes.tolist() == [m.index]
            np.testing.assert_array_equal(r, m.residual)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 4]), st.sampled_from([4, 8]))
def test_beam1_equals_greedy(seed, d, n):
    m = tiny_model(n=n, d=d, nq=3, seed=seed)
    x = np.random.default_rng(seed).standard_normal(d)
    b, br = encode_frame_beam(m.groups[0], x, 1)
    g, gr = encode_frame_greedy(m.groups[0], x)
    assert np.array_equal(b, g) and np.array_equal(br, gr)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([4, 8]), st.integers(1, 10))
def test_beam_bounded_by_oracle_and_saturates(seed, n, k):
    m = tiny_model(n=n, d=2, nq=2, seed=seed)
    layers = [cb.entries for cb in m.groups[0]]
    x = np.random.default_rng(seed).standard_normal(2)
    best_err, _ = brute_force_paths(layers, x)
    _, r = encode_frame_beam(m.groups[0], x, k)
    err = naive_sq_dist(r, [0, 0])
    assert err >= best_err - 1e-12
    if k >= n:
        assert err == pytest.approx(best_err, rel=1e-12, abs=1e-15)


def test_incumbent_survives_every_layer(rng):
    m = tiny_model(n=8, d=3, nq=4, seed=21)
    layers = [cb.entries for cb in m.groups[0]]
    for x in rng.standard_normal((40, 3)):
        for k in (2, 3):
            trace = []
            beam_batch(layers, x[None, :], k, trace=trace)
            prev = [x]
            for step, c in zip(trace, layers):
                pool = [naive_sq_dist(r, w) for r in prev for w in c]
                kept = step["err"][0]
                assert min(kept) == pytest.approx(min(pool), rel=1e-12, abs=1e-15)
                assert list(kept) == sorted(kept)
                prev = list(step["residual"][0])


def test_beam_paths_invariants(rng):
    m = tiny_model(n=8, d=3, nq=3, seed=2)
    x = rng.standard_normal(3)
    paths = beam_paths(m.groups[0], x, 3)
    assert len(paths) == 3
    for depth, layer in enumerate(paths, start=1):
        assert len(layer) == 3
        for p in layer:
            assert len(p.code_prefix) == depth
            assert p.err == pytest.approx(float(np.dot(p.residual, p.residual)), rel=1e-12)
            recon = sum(m.groups[0][i].entries[c] for i, c in enumerate(p.code_prefix))
            np.testing.assert_allclose(x - recon, p.residual, atol=1e-12)
    codes, _ = encode_frame_beam(m.groups[0], x, 3)
    assert tuple(codes.tolist()) == paths[-1][0].code_prefix


def test_ties_prefer_lower_parent_then_index():
    layers = [np.array([[1.0, 0], [-1.0, 0]]), np.array([[0, 1.0], [0, -1.0]])]
    paths = beam_paths([Codebook(c) for c in layers], [0, 0], 4)
    assert [p.code_prefix for p in paths[0]] == [(0,), (1,)]
    assert [p.code_prefix for p in paths[1]] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_beam_deterministic(rng):
    m = tiny_model(n=16, d=4, nq=3, seed=5)
    x = rng.standard_normal(4)
    a = encode_frame_beam(m.groups[0], x, 4)[0]
    b = encode_frame_beam(m.groups[0], x, 4)[0]
    assert np.array_equal(a, b)


def test_beam_macs_factor():
    assert beam_macs_factor(QuantizerSpec(6000, 6, 100, 256, 1, 1)) == 1
    assert beam_macs_factor(QuantizerSpec(6000, 6, 100, 256, 2, 4)) == 3
    assert beam_macs_factor(QuantizerSpec(6000, 6, 100, 256, 1, 4)) == Fraction(7, 2)


@given(st.integers(1, 16), st.sampled_from([1, 2, 3, 6]))
def test_beam_factor_matches_formula(k, g):
    spec = QuantizerSpec(6000, 6, 100, 12, g, k)
    assert beam_macs_factor(spec) == formula_beam_factor(k, 6, g)


def test_gb_degenerate_cases(rng):
    m1 = tiny_model(n=16, d=4, nq=2, g=1, seed=3)
    m2 = tiny_model(n=16, d=4, nq=4, g=2, seed=3)
    for x in rng.standard_normal((30, 4)):
        assert np.array_equal(encode_frame_gb(m1, x, 1), encode_frame(m1, x, "greedy"))
        assert np.array_equal(encode_frame_gb(m2, x, 1), encode_frame(m2, x, "greedy"))
        gb = encode_frame_gb(m2, x, 4)
        halves = [encode_frame_beam(m2.groups[g], x[m2.group_slice(g)], 4)[0] for g in range(2)]
        assert np.array_equal(gb, np.concatenate(halves))
