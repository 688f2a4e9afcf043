import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shotnoise.rng import RngStream, stream

U64 = st.integers(0, 2**64 - 1)


@settings(max_examples=50, deadline=None)
@given(seed=U64, index=U64)
def test_same_key_same_draws(seed, index):
    a = RngStream(seed, index).gen.random(32)
    b = stream(seed, index).gen.random(32)
    assert np.array_equal(a, b)


def test_distinct_keys_distinct_draws():
    base = RngStream(7, 0).gen.random(8)
    assert not np.array_equal(base, RngStream(7, 1).gen.random(8))
    assert not np.array_equal(base, RngStream(8, 0).gen.random(8))


def test_draws_independent_of_creation_order():
    late = [RngStream(3, i) for i in range(5)][::-1]
    early = [RngStream(3, i).gen.standard_normal(4) for i in range(5)]
    for i, r in enumerate(reversed(late)):
        assert np.array_equal(r.gen.standard_normal(4), early[i])


def test_uniform_open_closed_range():
    u = RngStream(1, 2).uniform_open_closed(10**6)
    assert u.min() > 0.0 and u.max() <= 1.0


def test_child_offsets_index():
    c = RngStream(5, 10).child(3)
    assert (c.master_seed, c.stream_index) == (5, 13)
    assert RngStream(5, 2**64 - 1).child(1).stream_index == 0


@pytest.mark.parametrize("seed,index", [(-1, 0), (0, -1), (2**64, 0), (0, 2**64)])
def test_rejects_keys_outside_uint64(seed, index):
    with pytest.raises(ValueError):
        RngStream(seed, index)
