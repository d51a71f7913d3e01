"""Scaled DFTs of arbitrary length through a single packed integer product.

The transform is ``Y_t = (1/n) sum_s zeta**(-s t) X_s`` (forward) or the same
with ``zeta**(+s t)`` (inverse kernel).  Both are rewritten as an acyclic
convolution with chirp factors ``omega_k = zeta**(k(k-1)/2)``, and the
convolution is evaluated by Kronecker substitution.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .kronecker import convolve_slices
from .machines import BUILTIN, CostLedger, MultMachine
from .numerics import (FixedArray, FixedComplex, lg, omega_chain, power_chain,
                       root_of_unity)

log = logging.getLogger(__name__)

__all__ = [
    "FORWARD",
    "INVERSE",
    "DftRequest",
    "bluestein_dft",
    "bluestein_dft_slices",
    "reshape_for_slices",
    "scale_slices",
]

FORWARD = "forward"
INVERSE = "inverse"


@dataclass(frozen=True)
class DftRequest:
    """Length ``n`` transform at precision ``p`` with multiplication size ``m``.

    ``chunk_m``, when set, is the operand size the big product is cut into;
    it lets a caller hand in ``m = l*n*p`` for validation while still only
    issuing machine calls of a smaller size.
    """

    n: int
    p: int
    m: int
    direction: str = FORWARD
    chunk_m: Optional[int] = None

    def __post_init__(self):
        if self.n < 1 or self.p < 1 or self.m < 1:
            raise ValueError("n, p and m must be positive")
        if self.direction not in (FORWARD, INVERSE):
            raise ValueError(f"direction must be {FORWARD!r} or {INVERSE!r}")

    def validate(self, l1: int = 1, l2: int = 1) -> None:
        if l1 * l2 * self.n * self.p > self.m:
            raise ValueError(
                f"l1*l2*n*p = {l1 * l2 * self.n * self.p} exceeds m = {self.m}")
        if lg(self.p) ** 2 >= 64 * l1 * l2 * self.n:
            log.debug("lg^2 p large relative to l1*l2*n (n=%d, p=%d)", self.n, self.p)


def scale_slices(arr: FixedArray, factors: Sequence, p: int,
                 machine: MultMachine = BUILTIN,
                 ledger: Optional[CostLedger] = None) -> FixedArray:
    """Multiply entry ``(i1, s, i2)`` by ``factors[s]`` in one pass, rounding toward zero."""
    l1, n, l2 = arr.shape
    mul = machine.signed_multiply
    src_re, src_im = arr.re, arr.im
    out_re = [0] * arr.size
    out_im = [0] * arr.size
    idx = 0
    for _ in range(l1):
        for s in range(n):
            c, d = factors[s]
            for _ in range(l2):
                a = src_re[idx]
                b = src_im[idx]
                r = mul(a, c) - mul(b, d)
                i = mul(a, d) + mul(b, c)
                out_re[idx] = r >> p if r >= 0 else -((-r) >> p)
                out_im[idx] = i >> p if i >= 0 else -((-i) >> p)
                idx += 1
    if ledger is not None:
        ledger.record_calls(p + 1, 4 * arr.size, machine)
    return FixedArray(out_re, out_im, arr.shape)


def _chirp_factors(req: DftRequest, machine: MultMachine, ledger, trace):
    n, p = req.n, req.p
    zeta = root_of_unity(n, p)
    gammas = power_chain(zeta, n, p, machine, ledger)
    omegas = omega_chain(gammas, p, machine, ledger)
    if req.direction == INVERSE:
        omegas = [w.conj() for w in omegas]
    # omega_{-s} = omega_{s+1}
    B = [omegas[n - r] if r < n - 1 else omegas[r - n + 1] for r in range(2 * n - 1)]
    pre = [omegas[s + 1].conj() for s in range(n)]
    post = [omegas[t].conj() for t in range(n)]
    if trace is not None:
        trace.update(zeta=zeta, gammas=gammas, omegas=omegas, B=B)
    return B, pre, post


def bluestein_dft_slices(X_hat: FixedArray, req: DftRequest,
                         M: MultMachine = BUILTIN, M_prime: Optional[MultMachine] = None,
                         ledger: Optional[CostLedger] = None,
                         trace: Optional[dict] = None, fault=None) -> FixedArray:
    """Transform every slice ``(i1, *, i2)`` of an ``l1 x n x l2`` array.

    All slices share one packed product.  Pass a dict as ``trace`` to
    receive the intermediate chirp factors and arrays.
    """
    M_prime = M_prime or M
    l1, n, l2 = X_hat.shape
    if n != req.n:
        raise ValueError(f"array has slice length {n}, request says {req.n}")
    req.validate(l1, l2)
    if n == 1:
        return X_hat.copy()
    p = req.p
    B, pre, post = _chirp_factors(req, M_prime, ledger, trace)
    X_prime = scale_slices(X_hat, pre, p, M_prime, ledger)
    Y_prime = convolve_slices(X_prime, B, p, req.m, M, M_prime, ledger,
                              chunk_m=req.chunk_m, fault=fault)
    Y = scale_slices(Y_prime, post, p, M_prime, ledger)
    if trace is not None:
        trace.update(X_prime=X_prime, Y_prime=Y_prime, Y=Y)
    return Y


def bluestein_dft(X_hat: Sequence, req: DftRequest,
                  M: MultMachine = BUILTIN, M_prime: Optional[MultMachine] = None,
                  ledger: Optional[CostLedger] = None,
                  trace: Optional[dict] = None) -> List[FixedComplex]:
    arr = FixedArray.from_points(X_hat, (1, len(X_hat), 1))
    return bluestein_dft_slices(arr, req, M, M_prime, ledger, trace).points()


def reshape_for_slices(array: FixedArray, axis: int) -> FixedArray:
    """View an array as ``(prod(before), shape[axis], prod(after))`` without copying."""
    shape = array.shape
    if not 0 <= axis < len(shape):
        raise ValueError(f"axis {axis} out of range for shape {shape}")
    l1 = math.prod(shape[:axis])
    l2 = math.prod(shape[axis + 1:])
    return array.reshape((l1, shape[axis], l2))
