"""Generalised transposition by a forward DFT and a Cooley-Tukey factored inverse.

The input ``l1 x n1 x n2 x l2`` array is encoded on the unit disc, transformed
along its length ``n = n1*n2`` slices, and then inverted in two passes (first
along ``n2``, then along ``n1``) with twiddle factors in between.  The second
factorisation produces the coefficients in transposed order, so rounding the
result gives the transposed array.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .bluestein import FORWARD, INVERSE, DftRequest, bluestein_dft_slices, reshape_for_slices, scale_slices
from .machines import BUILTIN, CostLedger, MultMachine
from .numerics import FixedArray, lg, power_chain, root_of_unity
from .packed import PackedArray, pack_entries

__all__ = [
    "DecodeError",
    "TransposeParams",
    "precision_for",
    "encode_fixed",
    "twiddle_apply",
    "decode_round",
    "transpose_via_mult",
]


class DecodeError(RuntimeError):
    """A decoded value was not within 1/2 of a valid entry; never expected on valid input."""


@dataclass(frozen=True)
class TransposeParams:
    l1: int
    n1: int
    n2: int
    l2: int
    b: int
    m: Optional[int] = None

    def __post_init__(self):
        for name in ("l1", "n1", "n2", "l2", "b"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.m is None:
            object.__setattr__(self, "m", self.l1 * self.l2 * self.n1 * self.n2 * self.b)
        if self.l1 * self.l2 * self.n1 * self.n2 * self.b > self.m:
            raise ValueError(f"l1*l2*n1*n2*b exceeds m = {self.m}")

    @classmethod
    def for_array(cls, A: PackedArray, m: Optional[int] = None) -> "TransposeParams":
        l1, n1, n2, l2 = A.dims
        return cls(l1, n1, n2, l2, A.width, m)

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    @property
    def l(self) -> int:
        return self.l1 * self.l2


def precision_for(b: int, n: int) -> int:
    """Working precision ``b + lg(80 n**3)``; just enough to round back exactly."""
    return b + lg(80 * n ** 3)


def encode_fixed(A: PackedArray, p: int) -> FixedArray:
    """Entries ``a`` become the exact disc points ``a * 2**-b``, shape ``(l1, n, l2)``."""
    b = A.width
    if p < b:
        raise ValueError(f"precision {p} is below entry width {b}")
    l1, n1, n2, l2 = A.dims
    shift = p - b
    re = [e << shift for e in A.entries()]
    return FixedArray(re, [0] * len(re), (l1, n1 * n2, l2))


def twiddle_apply(U_hat: FixedArray, n1: int, n2: int, p: int,
                  M_prime: MultMachine = BUILTIN,
                  ledger: Optional[CostLedger] = None) -> FixedArray:
    """Multiply entry ``(i1, j2, k1, i2)`` by ``zeta_n**(j2*k1)``, ``n = n1*n2``.

    ``zeta_n**k1`` comes from one power chain, then ``(zeta_n**k1)**j2`` from
    a chain per ``k1``.
    """
    l1, d2, d1, l2 = U_hat.shape
    if (d2, d1) != (n2, n1):
        raise ValueError(f"expected shape (l1, {n2}, {n1}, l2), got {U_hat.shape}")
    zeta = root_of_unity(n1 * n2, p)
    first = power_chain(zeta, n1, p, M_prime, ledger)
    columns = [power_chain(g, n2, p, M_prime, ledger) for g in first]
    factors = [columns[k1][j2] for j2 in range(n2) for k1 in range(n1)]
    flat = U_hat.reshape((l1, n2 * n1, l2))
    return scale_slices(flat, factors, p, M_prime, ledger).reshape(U_hat.shape)


def decode_round(W_hat: FixedArray, b: int, p: int, n: int,
                 trace: Optional[dict] = None) -> PackedArray:
    """Recover entries as the nearest integer to ``2**b * n * W``.

    Raises :class:`DecodeError` unless every real part lies strictly within
    1/2 of an integer in ``[0, 2**b)`` and every imaginary part is strictly
    below 1/2 in the same scale.
    """
    d = 1 << (p - b)
    two_d = 2 * d
    top = 1 << b
    out = []
    worst = 0
    worst_im = 0
    for idx, (re, im) in enumerate(zip(W_hat.re, W_hat.im)):
        num2 = 2 * n * re
        k = (num2 + d) // two_d
        dist2 = abs(num2 - k * two_d)  # 2*d*|value - k|
        if dist2 >= d:
            raise DecodeError(f"entry {idx}: value {n * re}/{d} is not within 1/2 of an integer")
        if not 0 <= k < top:
            raise DecodeError(f"entry {idx}: decoded {k} outside [0, 2**{b})")
        im2 = abs(2 * n * im)
        if im2 >= d:
            raise DecodeError(f"entry {idx}: imaginary part {n * im}/{d} is not below 1/2")
        worst = max(worst, dist2)
        worst_im = max(worst_im, im2)
        out.append(k)
    if trace is not None:
        trace["max_round_dist"] = worst / two_d
        trace["max_imag"] = worst_im / two_d
    l1, d2, d1, l2 = W_hat.shape
    return PackedArray((l1, d2, d1, l2), b, pack_entries(out, b))


def transpose_via_mult(A: PackedArray, params: Optional[TransposeParams] = None,
                       M: MultMachine = BUILTIN, M_prime: Optional[MultMachine] = None,
                       ledger: Optional[CostLedger] = None,
                       trace: Optional[dict] = None, fault=None) -> PackedArray:
    """Swap the middle axes of ``A`` using three packed products.

    Returns an array of dims ``(l1, n2, n1, l2)``.  ``trace`` (a dict)
    receives the intermediate arrays ``R, S, U, V, W`` and the precision.
    """
    M_prime = M_prime or M
    params = params or TransposeParams.for_array(A)
    l1, n1, n2, l2 = A.dims
    b = A.width
    if (params.l1, params.n1, params.n2, params.l2, params.b) != (l1, n1, n2, l2, b):
        raise ValueError(f"params {params} do not match array dims {A.dims} x {b}")
    if n1 == 1 or n2 == 1:
        if ledger is not None:
            ledger.count("transpose_relabel")
            ledger.move(A.nbits)
        return PackedArray((l1, n2, n1, l2), b, A.bits)
    if ledger is not None:
        ledger.count("transpose_via_mult")

    n = n1 * n2
    p = precision_for(b, n)
    m_work = params.l * n * p
    chunk_m = params.m

    R = encode_fixed(A, p)
    S = bluestein_dft_slices(R, DftRequest(n, p, m_work, FORWARD, chunk_m), M, M_prime, ledger)
    # S read as (l1, n2, n1, l2): index k = k2*n1 + k1
    S4 = S.reshape((l1, n2, n1, l2))
    U = bluestein_dft_slices(reshape_for_slices(S4, 1), DftRequest(n2, p, m_work, INVERSE, chunk_m),
                             M, M_prime, ledger).reshape(S4.shape)
    V = twiddle_apply(U, n1, n2, p, M_prime, ledger)
    W = bluestein_dft_slices(reshape_for_slices(V, 2), DftRequest(n1, p, m_work, INVERSE, chunk_m),
                             M, M_prime, ledger, fault=fault).reshape(V.shape)
    if trace is not None:
        trace.update(p=p, R=R, S=S4, U=U, V=V, W=W)
    return decode_round(W, b, p, n, trace)
