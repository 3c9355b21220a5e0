import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdsgame.coding import (
    CodeParams,
    CodingError,
    InsufficientPacketsError,
    UnsupportedParametersError,
    build_generator,
    decode,
    encode,
    gf_add,
    gf_det,
    gf_inv,
    gf_mul,
)
from mdsgame.oracles import peasant_mul

byte = st.integers(0, 255)


def random_source(k, length=16, seed=0):
    rng = random.Random(seed)
    return [bytes(rng.randrange(256) for _ in range(length)) for _ in range(k)]


def test_gf_mul_identity_and_zero():
    for a in range(256):
        assert gf_mul(a, 1) == a
        assert gf_mul(a, 0) == 0


def test_gf_mul_pinned_value():
    assert peasant_mul(0x02, 0x80) == 0x1D
    assert gf_mul(0x02, 0x80) == 0x1D


def test_gf_mul_matches_peasant_oracle_exhaustively():
    for a in range(256):
        for b in range(256):
            assert gf_mul(a, b) == peasant_mul(a, b)


def test_gf_inv():
    assert gf_inv(1) == 1
    for a in range(1, 256):
        assert gf_mul(a, gf_inv(a)) == 1
        assert gf_inv(gf_inv(a)) == a
    with pytest.raises(ZeroDivisionError):
        gf_inv(0)


@given(byte, byte, byte)
def test_field_axioms(a, b, c):
    assert gf_add(a, b) == a ^ b == gf_add(b, a)
    assert gf_add(gf_add(a, b), c) == gf_add(a, gf_add(b, c))
    assert gf_mul(a, b) == gf_mul(b, a)
    assert gf_mul(gf_mul(a, b), c) == gf_mul(a, gf_mul(b, c))
    assert gf_mul(a, gf_add(b, c)) == gf_add(gf_mul(a, b), gf_mul(a, c))


def test_code_params():
    p = CodeParams(k=4, r=2)
    assert (p.N, p.d_min, p.e_max) == (6, 3, 2)
    assert p.rate == pytest.approx(4 / 6)
    with pytest.raises(UnsupportedParametersError):
        CodeParams(k=200, r=57)
    with pytest.raises(UnsupportedParametersError):
        CodeParams(k=0)
    CodeParams(k=200, r=56)


def test_generator_zero_redundancy_is_identity():
    assert np.array_equal(build_generator(CodeParams(3, 0)), np.eye(3, dtype=np.uint8))


def test_generator_repetition_code():
    g = build_generator(CodeParams(1, 1))
    assert g.shape == (2, 1)
    assert g[0, 0] == 1 and g[1, 0] != 0


@pytest.mark.parametrize("k, r", [(4, 2), (3, 3), (2, 5), (5, 1)])
def test_generator_every_square_submatrix_invertible(k, r):
    g = build_generator(CodeParams(k, r))
    assert np.array_equal(g[:k], np.eye(k, dtype=np.uint8))
    subsets = list(itertools.combinations(range(k + r), k))
    assert len(subsets) == math.comb(k + r, k)
    for rows in subsets:
        assert gf_det(g[list(rows)]) != 0, rows


def test_generator_full_size_supported():
    g = build_generator(CodeParams(128, 128))
    assert g.shape == (256, 128)


def test_encode_identity_when_no_redundancy():
    src = random_source(3)
    coded = encode(src, CodeParams(3, 0))
    assert [p.payload for p in coded] == src
    assert [p.index for p in coded] == [0, 1, 2]


def test_encode_repetition():
    src = random_source(1)
    params = CodeParams(1, 2)
    coded = encode(src, params)
    assert len(coded) == 3
    for pkt in coded:
        assert decode([pkt], params) == src


def test_encode_rejects_bad_input():
    with pytest.raises(CodingError):
        encode([b"ab", b"abc"], CodeParams(2, 1))
    with pytest.raises(CodingError):
        encode([b"ab"], CodeParams(2, 1))


def test_every_k_subset_decodes_k4_r2():
    params = CodeParams(4, 2)
    src = random_source(4, seed=7)
    coded = encode(src, params)
    subsets = list(itertools.combinations(coded, 4))
    assert len(subsets) == 15
    for subset in subsets:
        assert decode(subset, params) == src


def test_decode_systematic_prefix_and_mapping_input():
    params = CodeParams(3, 2)
    src = random_source(3)
    coded = encode(src, params)
    assert decode(coded[:3], params) == src
    assert decode({p.index: p.payload for p in coded[2:]}, params) == src


def test_decode_errors():
    params = CodeParams(4, 2)
    coded = encode(random_source(4), params)
    with pytest.raises(InsufficientPacketsError):
        decode(coded[:3], params)
    with pytest.raises(CodingError):
        decode([coded[0], coded[0], coded[1], coded[2]], params)


def test_erasure_tolerance_boundary():
    params = CodeParams(5, 3)
    src = random_source(5, seed=3)
    coded = encode(src, params)
    erased = {1, 4, 6}
    assert len(erased) == params.e_max
    assert decode([p for p in coded if p.index not in erased], params) == src
    with pytest.raises(InsufficientPacketsError):
        decode([p for p in coded if p.index not in erased | {0}], params)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 4), st.integers(1, 40), st.randoms(use_true_random=False))
def test_round_trip_random_subsets(k, r, length, rnd):
    params = CodeParams(k, r)
    src = [bytes(rnd.randrange(256) for _ in range(length)) for _ in range(k)]
    coded = encode(src, params)
    assert [p.payload for p in coded[:k]] == src
    subset = rnd.sample(coded, k)
    assert decode(subset, params) == src
