"""Matrix files: one text header line followed by the bit-packed payload.

Layout::

    TPMX 1 l1 n1 n2 l2 b\\n<payload>

The payload is the packed array read as a little-endian integer: entry
``k`` occupies bits ``[k*b, (k+1)*b)`` with its least significant bit
first, and the last byte is padded with zero bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

from .packed import PackedArray

__all__ = ["MAGIC", "VERSION", "FormatError", "MatrixFile", "read_matrix", "write_matrix"]

MAGIC = "TPMX"
VERSION = 1
_FIELDS = ("l1", "n1", "n2", "l2", "b")
_MAX_HEADER = 256


class FormatError(ValueError):
    """The file is not a valid matrix file; the message names the offending field."""


@dataclass(frozen=True)
class MatrixFile:
    l1: int
    n1: int
    n2: int
    l2: int
    b: int
    payload: int

    @property
    def dims(self) -> Tuple[int, int, int, int]:
        return (self.l1, self.n1, self.n2, self.l2)

    @property
    def nbits(self) -> int:
        return math.prod(self.dims) * self.b

    @classmethod
    def from_array(cls, A: PackedArray) -> "MatrixFile":
        return cls(*A.dims, A.width, A.bits)

    def to_array(self) -> PackedArray:
        return PackedArray(self.dims, self.b, self.payload)

    def header(self) -> bytes:
        return f"{MAGIC} {VERSION} {self.l1} {self.n1} {self.n2} {self.l2} {self.b}\n".encode("ascii")

    def to_bytes(self) -> bytes:
        nbytes = (self.nbits + 7) // 8
        return self.header() + self.payload.to_bytes(nbytes, "little")

    @classmethod
    def from_bytes(cls, data: bytes) -> "MatrixFile":
        end = data.find(b"\n", 0, _MAX_HEADER)
        if end < 0:
            raise FormatError("header: missing newline-terminated header line")
        try:
            tokens = data[:end].decode("ascii").split(" ")
        except UnicodeDecodeError:
            raise FormatError("header: not ASCII") from None
        if tokens[0] != MAGIC:
            raise FormatError(f"magic: expected {MAGIC!r}, got {tokens[0]!r}")
        if len(tokens) < 2 or tokens[1] != str(VERSION):
            got = tokens[1] if len(tokens) > 1 else "nothing"
            raise FormatError(f"version: expected {VERSION}, got {got!r}")
        if len(tokens) != 2 + len(_FIELDS):
            raise FormatError(f"header: expected {2 + len(_FIELDS)} fields, got {len(tokens)}")
        values = []
        for name, tok in zip(_FIELDS, tokens[2:]):
            if not tok.isdigit() or int(tok) < 1:
                raise FormatError(f"{name}: expected a positive integer, got {tok!r}")
            values.append(int(tok))
        payload = data[end + 1:]
        nbits = math.prod(values)
        nbytes = (nbits + 7) // 8
        if len(payload) != nbytes:
            raise FormatError(f"payload: expected {nbytes} bytes for l1*n1*n2*l2*b = {nbits} bits, "
                              f"got {len(payload)}")
        bits = int.from_bytes(payload, "little")
        if bits >> nbits:
            raise FormatError("payload: nonzero padding bits after the last entry")
        return cls(*values, bits)


def read_matrix(path: Union[str, Path]) -> PackedArray:
    return MatrixFile.from_bytes(Path(path).read_bytes()).to_array()


def write_matrix(path: Union[str, Path], A: PackedArray) -> None:
    Path(path).write_bytes(MatrixFile.from_array(A).to_bytes())
