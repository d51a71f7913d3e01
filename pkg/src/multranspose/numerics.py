"""Fixed-point complex arithmetic on the discretised unit disc.

A value at precision ``p`` is stored as a pair of integers ``(re, im)``
representing ``2**-p * (re + i*im)``.  All rounding is toward the origin,
so products of disc points stay inside the disc.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Sequence, Tuple, Union

__all__ = [
    "FixedComplex",
    "FixedArray",
    "GaussianInt",
    "lg",
    "lg_iter",
    "lg_star",
    "trunc_shift",
    "trunc_div",
    "round_toward_zero",
    "fp_mul",
    "root_of_unity",
    "power_chain",
    "omega_chain",
    "in_disc",
    "one",
]


class GaussianInt(NamedTuple):
    """Exact complex integer ``re + i*im``."""

    re: int
    im: int

    def conj(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)


class FixedComplex(NamedTuple):
    """Point of the 2**-p grid; the precision is carried by the caller."""

    re: int
    im: int

    def conj(self) -> "FixedComplex":
        return FixedComplex(self.re, -self.im)

    def to_complex(self, p: int) -> complex:
        return complex(self.re / 2**p, self.im / 2**p)


def one(p: int) -> FixedComplex:
    return FixedComplex(1 << p, 0)


def _check_precision(p: int) -> None:
    if p < 1:
        raise ValueError(f"precision must be >= 1, got {p}")


def in_disc(z: Sequence[int], p: int) -> bool:
    re, im = z
    return re * re + im * im <= 1 << (2 * p)


# --- logarithms -----------------------------------------------------------

def lg(n: int) -> int:
    """``max(ceil(log2 n), 1)`` computed exactly on integers."""
    if n < 1:
        raise ValueError(f"lg is defined for n >= 1, got {n}")
    return max((n - 1).bit_length(), 1)


def lg_iter(n: int, times: int) -> int:
    """``times``-fold composition of :func:`lg`."""
    for _ in range(times):
        n = lg(n)
    return n


def lg_star(n: int) -> int:
    """Number of applications of :func:`lg` needed to reach 1."""
    if n < 1:
        raise ValueError(f"lg_star is defined for n >= 1, got {n}")
    count = 0
    while n != 1:
        n = lg(n)
        count += 1
    return count


# --- rounding -------------------------------------------------------------

def trunc_shift(x: int, k: int) -> int:
    """``x / 2**k`` rounded toward zero."""
    return x >> k if x >= 0 else -((-x) >> k)


def trunc_div(x: int, d: int) -> int:
    """``x / d`` rounded toward zero, for ``d > 0``."""
    return x // d if x >= 0 else -((-x) // d)


Rational = Union[int, Fraction]


def _rho0(x: Rational) -> int:
    x = Fraction(x)
    q = x.numerator // x.denominator if x >= 0 else -((-x.numerator) // x.denominator)
    return q


def round_toward_zero(z, p: int) -> FixedComplex:
    """Round an exact complex rational to the 2**-p grid, toward the origin.

    ``z`` may be an int, a :class:`fractions.Fraction`, or a pair of either
    (real, imaginary).  Floats are rejected since they are not exact input.
    """
    _check_precision(p)
    if isinstance(z, tuple):
        x, y = z
    else:
        x, y = z, 0
    for part in (x, y):
        if isinstance(part, float):
            raise TypeError("round_toward_zero needs exact rationals, not floats")
    scale = 1 << p
    if isinstance(x, int) and isinstance(y, int):
        return FixedComplex(x * scale, y * scale)
    return FixedComplex(_rho0(Fraction(x) * scale), _rho0(Fraction(y) * scale))


# --- multiplication -------------------------------------------------------

def fp_mul(u_hat, v_hat, p: int, machine=None, ledger=None) -> FixedComplex:
    """Return ``rho(u_hat * v_hat)`` using four real products of size ``p + 1``."""
    from .machines import BUILTIN

    machine = machine or BUILTIN
    a, b = u_hat
    c, d = v_hat
    mul = machine.signed_multiply
    ac, bd, ad, bc = mul(a, c), mul(b, d), mul(a, d), mul(b, c)
    if ledger is not None:
        ledger.record_calls(p + 1, 4, machine)
    return FixedComplex(trunc_shift(ac - bd, p), trunc_shift(ad + bc, p))


# --- roots of unity -------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _pi_fixed(q: int) -> int:
    """floor-ish approximation of ``pi * 2**q`` with error below 2**-8 ulp.

    Machin's formula evaluated with 24 guard bits; each truncated term of the
    two arctangent series contributes at most one guard ulp.
    """
    guard = 24
    scale = 1 << (q + guard)

    def arctan_inv(k: int) -> int:
        total = 0
        power = scale // k
        k2 = k * k
        j = 0
        while power:
            term = power // (2 * j + 1)
            total += -term if j & 1 else term
            power //= k2
            j += 1
        return total

    return (16 * arctan_inv(5) - 4 * arctan_inv(239)) >> guard


def _sin_cos_fixed(x: int, q: int):
    """Taylor series for ``sin`` and ``cos`` of ``x * 2**-q`` with ``|x| <= 2**(q+2)``.

    Terms are accumulated until they vanish at precision ``q``; every
    truncation contributes at most one ulp, and the number of terms is
    bounded by ``q`` so the total error is below ``(q + 8) * 2**-q``.
    """
    sin_acc = 0
    cos_acc = 0
    term = 1 << q  # x**k / k! for k = 0
    k = 0
    while term:
        if k % 4 == 0:
            cos_acc += term
        elif k % 4 == 1:
            sin_acc += term
        elif k % 4 == 2:
            cos_acc -= term
        else:
            sin_acc -= term
        k += 1
        term = (term * x >> q) // k
    return sin_acc, cos_acc


@functools.lru_cache(maxsize=4096)
def root_of_unity(n: int, p: int) -> FixedComplex:
    """Approximation of ``exp(2*pi*i/n)`` on the 2**-p grid with error below 2 ulp.

    cos/sin are evaluated at a guard precision of ``p + 32`` bits and then
    rounded toward zero; the only exactly representable roots (1, -1, +-i)
    are returned exactly.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _check_precision(p)
    unit = 1 << p
    if n == 1:
        return FixedComplex(unit, 0)
    if n == 2:
        return FixedComplex(-unit, 0)
    if n == 4:
        return FixedComplex(0, unit)
    q = p + 32 + n.bit_length()
    theta = (2 * _pi_fixed(q + 4)) // n >> 4  # 2*pi/n at precision q
    s, c = _sin_cos_fixed(theta, q)
    shift = q - p
    z = FixedComplex(trunc_shift(c, shift), trunc_shift(s, shift))
    assert in_disc(z, p), (n, p, z)
    return z


def power_chain(zeta_hat, n: int, p: int, machine=None, ledger=None) -> List[FixedComplex]:
    """Powers ``zeta**0 .. zeta**(n-1)`` by repeated fixed-point products."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gammas = [one(p)]
    if n > 1:
        gammas.append(FixedComplex(*zeta_hat))
    for _ in range(2, n):
        gammas.append(fp_mul(gammas[-1], zeta_hat, p, machine, ledger))
    return gammas


def omega_chain(gammas: Sequence, p: int, machine=None, ledger=None) -> List[FixedComplex]:
    """Chirp factors ``omega_k = zeta**(k(k-1)/2)`` for ``k = 0 .. n``.

    Uses ``omega_k = omega_{k-1} * gamma_{k-1}`` with ``omega_0 = 1``.
    """
    n = len(gammas)
    omegas = [one(p)]
    for k in range(1, n + 1):
        omegas.append(fp_mul(omegas[-1], gammas[k - 1], p, machine, ledger))
    return omegas


@dataclass
class FixedArray:
    """Row-major array of disc points stored as parallel real/imaginary lists."""

    re: List[int]
    im: List[int]
    shape: Tuple[int, ...]

    def __post_init__(self):
        self.shape = tuple(int(d) for d in self.shape)
        size = math.prod(self.shape)
        if len(self.re) != size or len(self.im) != size:
            raise ValueError(f"data length does not match shape {self.shape}")

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]], shape=None) -> "FixedArray":
        pts = list(points)
        return cls([z[0] for z in pts], [z[1] for z in pts], shape or (len(pts),))

    @classmethod
    def zeros(cls, shape) -> "FixedArray":
        size = math.prod(shape)
        return cls([0] * size, [0] * size, shape)

    @property
    def size(self) -> int:
        return len(self.re)

    def points(self) -> List[FixedComplex]:
        return [FixedComplex(a, b) for a, b in zip(self.re, self.im)]

    def __getitem__(self, index) -> FixedComplex:
        if isinstance(index, tuple):
            flat = 0
            for i, d in zip(index, self.shape):
                if not 0 <= i < d:
                    raise IndexError(index)
                flat = flat * d + i
            index = flat
        return FixedComplex(self.re[index], self.im[index])

    def reshape(self, shape) -> "FixedArray":
        """Same storage, new row-major shape."""
        return FixedArray(self.re, self.im, shape)

    def copy(self) -> "FixedArray":
        return FixedArray(list(self.re), list(self.im), self.shape)
