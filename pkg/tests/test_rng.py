"""Generator identity, portability and stream separation."""

import numpy as np

from nullnet.rng import Xoshiro256, derive_state


def test_known_stream_is_stable():
    # frozen first outputs for seed 0 / stream 0; the generator identity
    # (xoshiro256** over splitmix64 expansion) is a compatibility contract
    r = Xoshiro256(0)
    got = [r.next_u64() for _ in range(4)]
    assert got == [
        11091344671253066420,
        13793997310169335082,
        1900383378846508768,
        7684712102626143532,
    ]


def test_seed_and_stream_change_the_sequence():
    a = [Xoshiro256(1, 0).next_u64() for _ in range(3)]
    b = [Xoshiro256(2, 0).next_u64() for _ in range(3)]
    c = [Xoshiro256(1, 1).next_u64() for _ in range(3)]
    assert a != b and a != c and b != c


def test_same_seed_same_sequence():
    assert [Xoshiro256(9, 3).next_u64() for _ in range(10)] == [
        Xoshiro256(9, 3).next_u64() for _ in range(10)
    ]


def test_derive_state_shape():
    st = derive_state(123, 4)
    assert st.dtype == np.uint64 and st.shape == (4,)
    assert st.any()


def test_randbelow_bounds_and_coverage():
    r = Xoshiro256(5)
    seen = set()
    for _ in range(2000):
        x = r.randbelow(7)
        assert 0 <= x < 7
        seen.add(x)
    assert seen == set(range(7))
    assert r.randbelow(1) == 0


def test_uniform_in_unit_interval():
    r = Xoshiro256(6)
    vals = [r.uniform() for _ in range(1000)]
    assert all(0.0 <= v < 1.0 for v in vals)
    assert 0.4 < sum(vals) / len(vals) < 0.6


def test_shuffle_is_a_permutation():
    r = Xoshiro256(7)
    arr = list(range(20))
    r.shuffle(arr)
    assert sorted(arr) == list(range(20))
    assert arr != list(range(20))
