from __future__ import annotations

import pytest

from esgbench.rng import SplitMix64


def test_reference_vectors():
    expected = {
        0: (0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F),
        42: (0xBDD732262FEB6E95, 0x28EFE333B266F103, 0x47526757130F9F52),
        0x123456789ABCDEF0: (
            0x161922C645CE50E8,
            0xAD760CAFA1697B60,
            0x3501FF44902CA50D,
        ),
    }
    for seed, wanted in expected.items():
        gen = SplitMix64(seed)
        assert tuple(gen.next_u64() for _ in range(3)) == wanted


def test_shuffle_reference_permutation():
    items = list(range(10))
    SplitMix64(7).shuffle(items)
    assert items == [8, 1, 5, 9, 0, 4, 3, 2, 6, 7]


def test_shuffle_is_a_permutation():
    for seed in range(20):
        items = [f"x{i}" for i in range(17)]
        SplitMix64(seed).shuffle(items)
        assert sorted(items) == sorted(f"x{i}" for i in range(17))
        assert len(set(items)) == 17


def test_shuffle_is_deterministic_per_seed():
    a = list(range(50))
    b = list(range(50))
    SplitMix64(123).shuffle(a)
    SplitMix64(123).shuffle(b)
    assert a == b
    c = list(range(50))
    SplitMix64(124).shuffle(c)
    assert c != a


def test_outputs_stay_in_64_bits():
    gen = SplitMix64(2**64 - 1)
    for _ in range(100):
        value = gen.next_u64()
        assert 0 <= value < 2**64


def test_next_below_bound():
    gen = SplitMix64(5)
    for bound in (1, 2, 7, 1000):
        for _ in range(50):
            assert 0 <= gen.next_below(bound) < bound
    with pytest.raises(ValueError):
        gen.next_below(0)


def test_empty_and_single_shuffles_are_noops():
    empty: list[int] = []
    SplitMix64(1).shuffle(empty)
    assert empty == []
    one = [42]
    SplitMix64(1).shuffle(one)
    assert one == [42]
