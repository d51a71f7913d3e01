import random

import pytest
from hypothesis import given, settings, strategies as st

from multranspose.fileformat import FormatError, MatrixFile, read_matrix, write_matrix
from multranspose.packed import PackedArray


@settings(max_examples=60)
@given(st.tuples(*[st.integers(1, 5)] * 4), st.integers(1, 19), st.integers(0, 2**32))
def test_round_trip(dims, b, seed):
    A = PackedArray.random(dims, b, random.Random(seed))
    data = MatrixFile.from_array(A).to_bytes()
    assert MatrixFile.from_bytes(data).to_array() == A


def test_layout_is_lsb_first():
    A = PackedArray.from_entries((1, 1, 3, 1), 3, [1, 2, 7])
    data = MatrixFile.from_array(A).to_bytes()
    header, payload = data.split(b"\n", 1)
    assert header == b"TPMX 1 1 1 3 1 3"
    # bits: 1 -> 100, 2 -> 010, 7 -> 111, LSB first: 100 010 111 -> 0b111_010_001
    assert payload == bytes([0b11010001, 0b1])


def test_file_round_trip(tmp_path):
    A = PackedArray.random((2, 3, 4, 1), 5, random.Random(1))
    path = tmp_path / "m.tpmx"
    write_matrix(path, A)
    assert read_matrix(path) == A


@pytest.mark.parametrize("data,field", [
    (b"TPMY 1 1 1 1 1 8\n\x00", "magic"),
    (b"TPMX 2 1 1 1 1 8\n\x00", "version"),
    (b"TPMX 1 1 0 1 1 8\n\x00", "n1"),
    (b"TPMX 1 1 1 q 1 8\n\x00", "n2"),
    (b"TPMX 1 1 1 1 1 -8\n\x00", "b"),
    (b"TPMX 1 1 1 1 1\n\x00", "header"),
    (b"TPMX 1 1 1 1 1 8\n", "payload"),
    (b"TPMX 1 1 1 1 1 8\n\x00\x00", "payload"),
    (b"TPMX 1 1 1 1 1 3\n\xff", "payload"),
    (b"TPMX 1 1 1 1 1 8", "header"),
])
def test_malformed_files_name_the_field(data, field):
    with pytest.raises(FormatError, match=f"^{field}"):
        MatrixFile.from_bytes(data)
