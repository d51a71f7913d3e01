"""Bit-packed 4-D arrays of b-bit unsigned entries."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import List, Sequence, Tuple

__all__ = ["PackedArray", "unpack_entries", "pack_entries"]


def unpack_entries(bits: int, count: int, width: int) -> List[int]:
    """Split ``bits`` into ``count`` fields of ``width`` bits, entry 0 in the low bits."""
    if count == 0:
        return []
    total = count * width
    s = format(bits, f"0{total}b")
    return [int(s[total - (k + 1) * width:total - k * width], 2) for k in range(count)]


def pack_entries(entries: Sequence[int], width: int) -> int:
    if not entries:
        return 0
    fmt = f"0{width}b"
    return int("".join(format(e, fmt) for e in reversed(entries)), 2)


@dataclass(frozen=True)
class PackedArray:
    """Row-major ``(l1, d1, d2, l2)`` array with ``width``-bit entries.

    ``bits`` holds the whole payload as one integer: entry ``k`` (flat
    row-major index) occupies bits ``[k*width, (k+1)*width)``.  Reading the
    same bits with a different width or shape is a reinterpretation, not a
    copy.
    """

    dims: Tuple[int, int, int, int]
    width: int
    bits: int

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 4 or min(dims) < 1:
            raise ValueError(f"dims must be four positive integers, got {self.dims}")
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if self.bits < 0 or self.bits >> (math.prod(dims) * self.width):
            raise ValueError("payload does not fit dims * width bits")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_entries(cls, dims, width: int, entries: Sequence[int]) -> "PackedArray":
        dims = tuple(dims)
        if len(entries) != math.prod(dims):
            raise ValueError(f"expected {math.prod(dims)} entries, got {len(entries)}")
        limit = 1 << width
        for e in entries:
            if not 0 <= e < limit:
                raise ValueError(f"entry {e} does not fit in {width} bits")
        return cls(dims, width, pack_entries(entries, width))

    @classmethod
    def matrix(cls, rows: Sequence[Sequence[int]], width: int) -> "PackedArray":
        n1, n2 = len(rows), len(rows[0])
        return cls.from_entries((1, n1, n2, 1), width, [e for row in rows for e in row])

    @classmethod
    def random(cls, dims, width: int, rng: random.Random) -> "PackedArray":
        nbits = math.prod(dims) * width
        return cls(tuple(dims), width, rng.getrandbits(nbits) if nbits else 0)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    @property
    def nbits(self) -> int:
        return self.size * self.width

    def entries(self) -> List[int]:
        return unpack_entries(self.bits, self.size, self.width)

    def __getitem__(self, index) -> int:
        l1, d1, d2, l2 = self.dims
        i1, j1, j2, i2 = index
        flat = ((i1 * d1 + j1) * d2 + j2) * l2 + i2
        return (self.bits >> (flat * self.width)) & ((1 << self.width) - 1)

    def rows(self) -> List[List[int]]:
        """Entries of a plain matrix (``l1 == l2 == 1``) as nested lists."""
        l1, d1, d2, l2 = self.dims
        if l1 != 1 or l2 != 1:
            raise ValueError("rows() needs l1 == l2 == 1")
        e = self.entries()
        return [e[i * d2:(i + 1) * d2] for i in range(d1)]

    def reinterpret(self, dims, width: int) -> "PackedArray":
        """Same payload under a new shape and entry width (total bits must match)."""
        if math.prod(dims) * width != self.nbits:
            raise ValueError(f"cannot view {self.dims}x{self.width} as {dims}x{width}")
        return PackedArray(tuple(dims), width, self.bits)
