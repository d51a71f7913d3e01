import random

import pytest
from hypothesis import given, strategies as st

from multranspose.packed import PackedArray, pack_entries, unpack_entries


@given(st.integers(1, 20).flatmap(
    lambda w: st.lists(st.integers(0, (1 << w) - 1), max_size=50).map(lambda e: (w, e))))
def test_pack_unpack_round_trip(case):
    width, entries = case
    assert unpack_entries(pack_entries(entries, width), len(entries), width) == entries


def test_entry_zero_is_lowest():
    assert pack_entries([1, 0, 3], 2) == 0b110001


def test_indexing_row_major():
    A = PackedArray.from_entries((2, 2, 3, 1), 5, list(range(12)))
    assert A[(1, 0, 2, 0)] == 8
    B = PackedArray.matrix([[1, 2], [3, 4]], 3)
    assert B.rows() == [[1, 2], [3, 4]]


def test_reinterpret_keeps_bits():
    A = PackedArray.random((1, 4, 4, 1), 4, random.Random(0))
    B = A.reinterpret((1, 4, 2, 1), 8)
    assert B.bits == A.bits
    with pytest.raises(ValueError):
        A.reinterpret((1, 4, 4, 1), 3)


def test_validation():
    with pytest.raises(ValueError):
        PackedArray((1, 0, 1, 1), 1, 0)
    with pytest.raises(ValueError):
        PackedArray((1, 1, 1, 1), 2, 4)
    with pytest.raises(ValueError):
        PackedArray.from_entries((1, 1, 2, 1), 2, [1, 4])
