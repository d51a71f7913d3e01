"""High-precision references for measuring errors in ulps.

Everything here is deliberately naive: O(n**2) DFTs and convolutions
evaluated with mpmath at ``GUARD`` bits beyond the working precision, so the
reference error is far below one ulp.
"""

from __future__ import annotations

from typing import Dict, List, Sequence

import mpmath

from .numerics import FixedArray, FixedComplex
from .packed import PackedArray

__all__ = [
    "GUARD",
    "to_mpc",
    "exact_root",
    "error_ulps",
    "max_error_ulps",
    "naive_dft",
    "dft_slices",
    "exact_convolution",
    "poly_product",
    "cascade_reference",
    "cascade_errors",
]

GUARD = 64


def to_mpc(z, p: int) -> mpmath.mpc:
    """The disc point ``2**-p * (re + i*im)`` as an mpmath complex (exact)."""
    return mpmath.mpc(mpmath.ldexp(z[0], -p), mpmath.ldexp(z[1], -p))


def exact_root(n: int, sign: int = 1) -> mpmath.mpc:
    """``exp(sign * 2*pi*i / n)`` at the current mpmath precision."""
    return mpmath.expjpi(mpmath.mpf(2 * sign) / n)


def error_ulps(z_hat, z, p: int) -> float:
    """``2**p * |z_hat - z|`` with ``z_hat`` given as a fixed-point pair."""
    with mpmath.workprec(p + GUARD):
        return float(mpmath.ldexp(abs(to_mpc(z_hat, p) - z), p))


def max_error_ulps(approx, exact: Sequence, p: int) -> float:
    """Largest ulp error over paired entries; ``approx`` is a FixedArray or a list of pairs."""
    points = approx.points() if isinstance(approx, FixedArray) else list(approx)
    if len(points) != len(exact):
        raise ValueError("length mismatch between approximation and reference")
    with mpmath.workprec(p + GUARD):
        scale = mpmath.ldexp(1, p)
        worst = mpmath.mpf(0)
        for z_hat, z in zip(points, exact):
            worst = max(worst, abs(to_mpc(z_hat, p) - z))
        return float(worst * scale)


def naive_dft(X: Sequence, sign: int = -1) -> List[mpmath.mpc]:
    """``Y_t = (1/n) sum_s zeta**(sign*s*t) X_s`` at the current mpmath precision."""
    n = len(X)
    powers = [exact_root(n, sign) ** k for k in range(n)]
    return [mpmath.fsum(X[s] * powers[(s * t) % n] for s in range(n)) / n for t in range(n)]


def dft_slices(X: Sequence, shape, sign: int = -1) -> List[mpmath.mpc]:
    """Transform every slice ``(i1, *, i2)`` of a flat row-major ``(l1, n, l2)`` list."""
    l1, n, l2 = shape
    out = [None] * len(X)
    for i1 in range(l1):
        for i2 in range(l2):
            idx = [(i1 * n + s) * l2 + i2 for s in range(n)]
            for k, y in zip(idx, naive_dft([X[k] for k in idx], sign)):
                out[k] = y
    return out


def exact_convolution(F: Sequence, G: Sequence) -> List[mpmath.mpc]:
    """``H_t = (1/n) sum_s F_s G_(t+n-1-s)`` for ``len(G) == 2n - 1``."""
    n = len(F)
    return [mpmath.fsum(F[s] * G[t + n - 1 - s] for s in range(n)) / n for t in range(n)]


def poly_product(f: Sequence[int], g: Sequence[int]) -> List[int]:
    """Schoolbook coefficient list of ``f * g``."""
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, c in enumerate(g):
                out[i + j] += a * c
    return out


def cascade_reference(A: PackedArray, p: int) -> Dict[str, List[mpmath.mpc]]:
    """Exact ``S, U, V, W`` for the transposition pipeline on ``A``.

    Layouts match the pipeline's arrays: ``S`` is ``(l1, n, l2)`` read as
    ``(l1, n2, n1, l2)``; ``U, V, W`` are ``(l1, n2, n1, l2)``.
    """
    l1, n1, n2, l2 = A.dims
    b = A.width
    n = n1 * n2
    with mpmath.workprec(p + GUARD):
        R = [mpmath.mpc(mpmath.ldexp(e, -b)) for e in A.entries()]
        S = dft_slices(R, (l1, n, l2), -1)
        U = dft_slices(S, (l1, n2, n1 * l2), +1)
        zeta = exact_root(n, +1)
        V = list(U)
        for i1 in range(l1):
            for j2 in range(n2):
                for k1 in range(n1):
                    tw = zeta ** (j2 * k1)
                    base = ((i1 * n2 + j2) * n1 + k1) * l2
                    for i2 in range(l2):
                        V[base + i2] = U[base + i2] * tw
        W = dft_slices(V, (l1 * n2, n1, l2), +1)
    return {"R": R, "S": S, "U": U, "V": V, "W": W}


def cascade_errors(A: PackedArray, trace: dict) -> Dict[str, float]:
    """Measured ulp errors of the traced stages of one transposition run."""
    p = trace["p"]
    ref = cascade_reference(A, p)
    out = {name: max_error_ulps(trace[name], ref[name], p) for name in ("S", "U", "V", "W")}
    out["round_dist"] = float(trace["max_round_dist"])
    out["n"] = A.dims[1] * A.dims[2]
    return out


def fixed_to_mpc_list(points: Sequence[FixedComplex], p: int) -> List[mpmath.mpc]:
    return [to_mpc(z, p) for z in points]
