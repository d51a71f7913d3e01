"""Kronecker substitution: one big Gaussian-integer product carries a whole convolution."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .machines import BUILTIN, CostLedger, MultMachine, gaussian_multiply
from .numerics import FixedArray, FixedComplex, GaussianInt, lg, trunc_div

log = logging.getLogger(__name__)

__all__ = [
    "PackingError",
    "PackingSpec",
    "pack",
    "unpack",
    "pack_ints",
    "unpack_ints",
    "convolution_beta",
    "convolve",
    "convolve_slices",
]


class PackingError(ValueError):
    """A coefficient does not fit its slot, or a packed value does not decode."""


@dataclass(frozen=True)
class PackingSpec:
    """Slot layout for a packed coefficient array.

    Coefficients are given in row-major ``(block, s, lane)`` order and the
    coefficient at ``(block, s, lane)`` lands in slot
    ``block * block_offset + s * stride + lane``; slot ``k`` has weight
    ``2**(beta * k)``.  The flat case is ``stride=1, lanes=1, blocks=1``.
    """

    beta: int
    count: int
    stride: int = 1
    block_offset: int = 0
    lanes: int = 1
    blocks: int = 1

    def __post_init__(self):
        if self.beta < 3:
            raise ValueError("beta must be at least 3")
        if self.count < 1 or self.lanes < 1 or self.blocks < 1:
            raise ValueError("count, lanes and blocks must be positive")
        if self.lanes > self.stride:
            raise ValueError("lanes must not exceed stride")
        if self.blocks > 1 and self.block_offset < self.count * self.stride:
            raise ValueError("blocks would overlap")

    @property
    def size(self) -> int:
        return self.blocks * self.count * self.lanes

    @property
    def total_slots(self) -> int:
        return (self.blocks - 1) * self.block_offset + (self.count - 1) * self.stride + self.lanes

    def slots(self) -> List[int]:
        out = []
        for blk in range(self.blocks):
            base = blk * self.block_offset
            for s in range(self.count):
                row = base + s * self.stride
                out.extend(range(row, row + self.lanes))
        return out


def convolution_beta(p: int, n: int) -> int:
    """Slot width that keeps every coefficient of a length-n disc convolution unambiguous."""
    return 2 * p + lg(n) + 2


def pack_ints(values: Sequence[int], spec: PackingSpec) -> int:
    """Evaluate the signed polynomial with the given slot coefficients at ``2**beta``."""
    if len(values) != spec.size:
        raise ValueError(f"expected {spec.size} coefficients, got {len(values)}")
    beta = spec.beta
    limit = 1 << (beta - 2)
    fields = [0] * spec.total_slots
    for slot, v in zip(spec.slots(), values):
        if not -limit < v < limit:
            raise PackingError(f"coefficient {v} at slot {slot} exceeds 2**{beta - 2}")
        fields[slot] = v
    fmt = f"0{beta}b"
    zero = "0" * beta
    pos = "".join(format(v, fmt) if v > 0 else zero for v in reversed(fields))
    neg = "".join(format(-v, fmt) if v < 0 else zero for v in reversed(fields))
    return int(pos, 2) - int(neg, 2)


def unpack_ints(value: int, spec: PackingSpec) -> List[int]:
    """Recover signed slot coefficients, low slot first, then select the spec's slots.

    Each slot is read from the two's complement bit pattern and corrected by
    a borrow into the next slot whenever the residue is negative.  Every
    slot, including guard gaps, must decode to a magnitude of at most
    ``2**(beta - 2)`` and nothing may remain above the last slot.
    """
    beta = spec.beta
    total = spec.total_slots
    nbits = total * beta
    bits = format(value & ((1 << nbits) - 1), f"0{nbits}b")
    half = 1 << (beta - 1)
    full = 1 << beta
    limit = 1 << (beta - 2)
    digits = [0] * total
    carry = 0
    end = nbits
    for k in range(total):
        d = int(bits[end - beta:end], 2) + carry
        end -= beta
        if d >= half:
            d -= full
            carry = 1
        else:
            carry = 0
        if d > limit or d < -limit:
            raise PackingError(f"slot {k} residue {d} exceeds 2**{beta - 2}")
        digits[k] = d
    if (value >> nbits) + carry != 0:
        raise PackingError("packed value has bits above the last slot")
    return [digits[s] for s in spec.slots()]


def pack(coeffs: Sequence, spec: PackingSpec) -> GaussianInt:
    """Pack Gaussian-integer coefficients; real and imaginary parts separately."""
    return GaussianInt(pack_ints([c[0] for c in coeffs], spec),
                       pack_ints([c[1] for c in coeffs], spec))


def unpack(value, spec: PackingSpec) -> List[GaussianInt]:
    re = unpack_ints(value[0], spec)
    im = unpack_ints(value[1], spec)
    return [GaussianInt(a, b) for a, b in zip(re, im)]


def _check_complexity(p: int, n: int) -> None:
    # lg n < C p is needed only for the cost bound
    if lg(n) >= 8 * p:
        log.warning("lg n = %d is large relative to p = %d", lg(n), p)


def convolve_slices(F_hat: FixedArray, G_hat, p: int, m: int,
                    M: MultMachine = BUILTIN, M_prime: Optional[MultMachine] = None,
                    ledger: Optional[CostLedger] = None,
                    chunk_m: Optional[int] = None,
                    fault=None) -> FixedArray:
    """Convolve every slice ``(i1, *, i2)`` of ``F_hat`` with ``G_hat`` in one product.

    ``F_hat`` has shape ``(l1, n, l2)`` and ``G_hat`` holds ``2n - 1`` disc
    points.  Output entry ``(i1, t, i2)`` is
    ``rho(sum_s F[i1, s, i2] G[t + n - 1 - s] / n)``.  The big product is
    chunked to ``chunk_m`` bits (default ``m``).  ``fault`` is a test hook
    that may corrupt the packed product before decoding.
    """
    l1, n, l2 = F_hat.shape
    if isinstance(G_hat, FixedArray):
        g_re, g_im = G_hat.re, G_hat.im
    else:
        g_re = [z[0] for z in G_hat]
        g_im = [z[1] for z in G_hat]
    if len(g_re) != 2 * n - 1:
        raise ValueError(f"G must have {2 * n - 1} entries, got {len(g_re)}")
    if l1 * l2 * n * p > m:
        raise ValueError(f"l1*l2*n*p = {l1 * l2 * n * p} exceeds m = {m}")
    _check_complexity(p, n)

    beta = convolution_beta(p, n)
    fspec = PackingSpec(beta, n, l2, 3 * n * l2, l2, l1)
    gspec = PackingSpec(beta, 2 * n - 1, l2)
    wspec = PackingSpec(beta, 3 * n - 2, l2, 3 * n * l2, l2, l1)
    f = GaussianInt(pack_ints(F_hat.re, fspec), pack_ints(F_hat.im, fspec))
    g = GaussianInt(pack_ints(g_re, gspec), pack_ints(g_im, gspec))
    if ledger is not None:
        ledger.move(2 * beta * (fspec.total_slots + gspec.total_slots))
    w = gaussian_multiply(f, g, chunk_m or m, M, ledger, max_ratio=None)
    if fault is not None:
        w = fault(w, beta, wspec)
    w_re = unpack_ints(w.re, wspec)
    w_im = unpack_ints(w.im, wspec)
    if ledger is not None:
        ledger.move(2 * beta * wspec.total_slots)

    bound = n << (2 * p)
    peak = max(max(map(abs, w_re)), max(map(abs, w_im)))
    if peak > bound:
        raise PackingError(f"product coefficient {peak} exceeds n*2**(2p) = {bound}")

    div = n << p
    width = (3 * n - 2) * l2
    out_re = [0] * (l1 * n * l2)
    out_im = [0] * (l1 * n * l2)
    idx = 0
    for i1 in range(l1):
        start = i1 * width + (n - 1) * l2
        for j in range(start, start + n * l2):
            out_re[idx] = trunc_div(w_re[j], div)
            out_im[idx] = trunc_div(w_im[j], div)
            idx += 1
    return FixedArray(out_re, out_im, (l1, n, l2))


def convolve(F_hat: Sequence, G_hat: Sequence, p: int, m: int,
             M: MultMachine = BUILTIN, M_prime: Optional[MultMachine] = None,
             ledger: Optional[CostLedger] = None,
             chunk_m: Optional[int] = None) -> List[FixedComplex]:
    """Scaled acyclic convolution ``H_t = (1/n) sum_s F_s G_{t+n-1-s}``, rounded toward zero."""
    n = len(F_hat)
    arr = FixedArray.from_points(F_hat, (1, n, 1))
    return convolve_slices(arr, G_hat, p, m, M, M_prime, ledger, chunk_m).points()
