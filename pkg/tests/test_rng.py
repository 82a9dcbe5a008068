import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vcrank.rng import PCG32, derive_seed


def test_reference_sequence_matches_pcg_demo():
    # first outputs of the pcg32 reference demo, seeded with (42, 54)
    rng = PCG32(42, 54)
    got = [rng.next_u32() for _ in range(6)]
    assert got == [0xA15C02B7, 0x7B47F409, 0xBA1D3330, 0x83D2F293, 0xBFA4784B, 0xCBED606E]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 2**63 - 1), st.integers(1, 300))
def test_bulk_draws_equal_scalar_draws(seed, stream, n):
    a, b = PCG32(seed, stream), PCG32(seed, stream)
    bulk = a.next_u32_array(n)
    scalar = [b.next_u32() for _ in range(n)]
    assert bulk.tolist() == scalar
    assert a.next_u32() == b.next_u32()  # state advanced identically


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(1, 50))
def test_random_array_matches_scalar(seed, n):
    a, b = PCG32(seed), PCG32(seed)
    assert np.array_equal(a.random_array(n), np.array([b.random() for _ in range(n)]))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(1, 1000))
def test_randbelow_in_range(seed, bound):
    rng = PCG32(seed)
    assert all(0 <= rng.randbelow(bound) < bound for _ in range(20))


def test_randbelow_rejects_bad_bounds():
    with pytest.raises(ValueError):
        PCG32(0).randbelow(0)
    with pytest.raises(ValueError):
        PCG32(0).randbelow(2**32 + 1)


def test_permutation_is_a_permutation():
    p = PCG32(7).permutation(100)
    assert sorted(p) == list(range(100))
    assert p != list(range(100))


def test_randbelow_roughly_uniform():
    rng = PCG32(123)
    counts = np.bincount([rng.randbelow(6) for _ in range(60000)], minlength=6)
    assert np.all(np.abs(counts - 10000) < 400)


def test_streams_are_independent():
    a = [PCG32(5, 1).next_u32() for _ in range(3)]
    b = [PCG32(5, 2).next_u32() for _ in range(3)]
    assert a != b


def test_derive_seed_is_stable_and_order_sensitive():
    assert derive_seed("grid", 0, "red_green") == derive_seed("grid", 0, "red_green")
    assert derive_seed("a", "b") != derive_seed("b", "a")
    assert 0 <= derive_seed("x") < 2**64
