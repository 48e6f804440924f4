from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from secretsift.rng import SplitMix64, Xoshiro256

# Published reference outputs for both generators.
SPLITMIX_SEED0 = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
XOSHIRO_1234 = [
    11520,
    0,
    1509978240,
    1215971899390074240,
    1216172134540287360,
    607988272756665600,
    16172922978634559625,
    8476171486693032832,
    10595114339597558777,
    2904607092377533576,
]


def test_splitmix_reference():
    sm = SplitMix64(0)
    assert [sm.next() for _ in range(3)] == SPLITMIX_SEED0


def test_xoshiro_reference():
    x = Xoshiro256(state=(1, 2, 3, 4))
    assert [x.next() for _ in range(10)] == XOSHIRO_1234


def test_seeding_uses_splitmix():
    sm = SplitMix64(42)
    expected = Xoshiro256(state=tuple(sm.next() for _ in range(4)))
    seeded = Xoshiro256(42)
    assert [seeded.next() for _ in range(5)] == [expected.next() for _ in range(5)]


def test_zero_state_rejected():
    with pytest.raises(ValueError):
        Xoshiro256(state=(0, 0, 0, 0))


@given(st.integers(0, 2**64 - 1), st.integers(1, 10**6))
def test_below_in_range(seed, n):
    x = Xoshiro256(seed)
    assert all(0 <= x.below(n) < n for _ in range(20))


def test_below_rejects_nonpositive():
    with pytest.raises(ValueError):
        Xoshiro256(1).below(0)


def test_below_roughly_uniform():
    x = Xoshiro256(7)
    counts = Counter(x.below(6) for _ in range(60_000))
    assert all(abs(c - 10_000) < 400 for c in counts.values())


@given(st.integers(0, 2**64 - 1), st.lists(st.integers(), max_size=50))
def test_shuffle_is_permutation_and_reproducible(seed, items):
    a, b = list(items), list(items)
    Xoshiro256(seed).shuffle(a)
    Xoshiro256(seed).shuffle(b)
    assert a == b
    assert sorted(a) == sorted(items)


def test_shuffle_frozen_output():
    items = list(range(10))
    Xoshiro256(2024).shuffle(items)
    assert items == FROZEN_2024


# regression pin: changing this breaks reproducibility of published splits
FROZEN_2024 = [5, 4, 6, 0, 2, 9, 7, 1, 3, 8]
