"""Multiplication machines, chunked multiplication and the cost ledger."""

from __future__ import annotations

import logging
import operator
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .numerics import GaussianInt

try:  # GMP makes the builtin machine's large products much faster
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover
    _mpz = None

log = logging.getLogger(__name__)

__all__ = [
    "MultMachine",
    "CostLedger",
    "LevelRecord",
    "BUILTIN",
    "SCHOOLBOOK",
    "KARATSUBA",
    "MACHINES",
    "get_machine",
    "multiply",
    "multiply_chunked",
    "gaussian_multiply",
    "DEFAULT_CHUNK_RATIO",
    "bucket_of",
]

DEFAULT_CHUNK_RATIO = 8

LIMB_BITS = 64
LIMB_MASK = (1 << LIMB_BITS) - 1
KARATSUBA_CUTOFF = 8 * LIMB_BITS


def _limbs(x: int) -> List[int]:
    out = []
    while x:
        out.append(x & LIMB_MASK)
        x >>= LIMB_BITS
    return out


def _schoolbook(x: int, y: int) -> int:
    """Quadratic limb-by-limb product with explicit carry propagation."""
    xs, ys = _limbs(x), _limbs(y)
    if not xs or not ys:
        return 0
    acc = [0] * (len(xs) + len(ys) + 1)
    for i, a in enumerate(xs):
        carry = 0
        for j, b in enumerate(ys):
            t = acc[i + j] + a * b + carry
            acc[i + j] = t & LIMB_MASK
            carry = t >> LIMB_BITS
        k = i + len(ys)
        while carry:
            t = acc[k] + carry
            acc[k] = t & LIMB_MASK
            carry = t >> LIMB_BITS
            k += 1
    result = 0
    for limb in reversed(acc):
        result = (result << LIMB_BITS) | limb
    return result


def _karatsuba(x: int, y: int) -> int:
    n = max(x.bit_length(), y.bit_length())
    if n <= KARATSUBA_CUTOFF:
        return _schoolbook(x, y)
    half = n // 2
    mask = (1 << half) - 1
    x1, x0 = x >> half, x & mask
    y1, y0 = y >> half, y & mask
    z2 = _karatsuba(x1, y1)
    z0 = _karatsuba(x0, y0)
    z1 = _karatsuba(x1 + x0, y1 + y0) - z2 - z0
    return (z2 << (2 * half)) + (z1 << half) + z0


def _builtin(x: int, y: int) -> int:
    return x * y


_KINDS: Dict[str, Callable[[int, int], int]] = {
    "builtin": _builtin,
    "schoolbook": _schoolbook,
    "karatsuba": _karatsuba,
}


@dataclass(frozen=True)
class MultMachine:
    """Exact multiplier of non-negative integers."""

    kind: str
    name: str = ""

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown machine kind {self.kind!r}")
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    def multiply(self, x: int, y: int) -> int:
        if x < 0 or y < 0:
            raise ValueError("multiplication machines take non-negative operands")
        return _KINDS[self.kind](x, y)

    @property
    def signed_multiply(self) -> Callable[[int, int], int]:
        """Signed product built from :meth:`multiply` by tracking signs.

        The builtin machine multiplies signed integers natively with the same
        result, so it is handed out directly.
        """
        if self.kind == "builtin":
            return operator.mul
        raw = _KINDS[self.kind]

        def signed(x: int, y: int) -> int:
            r = raw(abs(x), abs(y))
            return -r if (x < 0) != (y < 0) else r

        return signed


BUILTIN = MultMachine("builtin")
SCHOOLBOOK = MultMachine("schoolbook")
KARATSUBA = MultMachine("karatsuba")
MACHINES = {m.kind: m for m in (BUILTIN, SCHOOLBOOK, KARATSUBA)}


def get_machine(name: str) -> MultMachine:
    try:
        return MACHINES[name]
    except KeyError:
        raise ValueError(f"unknown machine {name!r}; choose from {sorted(MACHINES)}") from None


def bucket_of(m: int) -> int:
    """Smallest power of two that is >= m."""
    return 1 << max(m - 1, 0).bit_length()


@dataclass
class LevelRecord:
    depth: int
    n1: int
    n2: int
    b: int
    s: Optional[int]
    m: int
    kind: str
    calls: int = 1

    def as_dict(self) -> dict:
        return {
            "depth": self.depth,
            "n1": self.n1,
            "n2": self.n2,
            "b": self.b,
            "s": self.s,
            "m": self.m,
            "kind": self.kind,
            "calls": self.calls,
        }


@dataclass
class CostLedger:
    """Counts multiplication-machine invocations by operand size.

    ``call_histogram`` maps a power-of-two bucket to a call count.  Named
    event counters (``counters``) track higher-level operations such as
    packed Gaussian products, and ``chunked`` logs every chunked product as
    ``(m, m_prime, calls)``.  Set ``timed=True`` to also accumulate machine
    time per bucket.
    """

    call_histogram: Counter = field(default_factory=Counter)
    bucket_bits: Counter = field(default_factory=Counter)
    bucket_time_ns: Counter = field(default_factory=Counter)
    total_operand_bits: int = 0
    bits_moved: int = 0
    counters: Counter = field(default_factory=Counter)
    chunked: List[Tuple[int, int, int]] = field(default_factory=list)
    levels: Dict[int, LevelRecord] = field(default_factory=dict)
    timed: bool = False

    @property
    def bytes_moved(self) -> int:
        return (self.bits_moved + 7) // 8

    @property
    def total_calls(self) -> int:
        return sum(self.call_histogram.values())

    def record_calls(self, m: int, count: int = 1, machine: Optional[MultMachine] = None) -> None:
        bucket = bucket_of(m)
        self.call_histogram[bucket] += count
        self.bucket_bits[bucket] += 2 * m * count
        self.total_operand_bits += 2 * m * count

    def record_time(self, m: int, ns: int) -> None:
        self.bucket_time_ns[bucket_of(m)] += ns

    def move(self, bits: int) -> None:
        self.bits_moved += bits

    def count(self, event: str, k: int = 1) -> None:
        self.counters[event] += k

    def record_level(self, depth, n1, n2, b, s, m, kind) -> None:
        rec = self.levels.get(depth)
        if rec is None:
            self.levels[depth] = LevelRecord(depth, n1, n2, b, s, m, kind)
        else:
            rec.calls += 1

    def trace(self) -> List[LevelRecord]:
        return [self.levels[d] for d in sorted(self.levels)]

    def merge(self, other: "CostLedger") -> "CostLedger":
        """Componentwise sum; level traces keep the first record per depth."""
        out = CostLedger(timed=self.timed or other.timed)
        for name in ("call_histogram", "bucket_bits", "bucket_time_ns", "counters"):
            getattr(out, name).update(getattr(self, name))
            getattr(out, name).update(getattr(other, name))
        out.total_operand_bits = self.total_operand_bits + other.total_operand_bits
        out.bits_moved = self.bits_moved + other.bits_moved
        out.chunked = self.chunked + other.chunked
        for src in (self, other):
            for d, rec in src.levels.items():
                if d in out.levels:
                    out.levels[d].calls += rec.calls
                else:
                    out.levels[d] = LevelRecord(**rec.as_dict())
        return out

    def measured_cost(self, bucket: int) -> float:
        """Mean cost per call in ``bucket``: nanoseconds if timed, else operand bits."""
        calls = self.call_histogram.get(bucket, 0)
        if not calls:
            return 0.0
        total = self.bucket_time_ns[bucket] if self.timed else self.bucket_bits[bucket]
        return total / calls

    def mcost_plus(self, m: int) -> float:
        """``m * max_{k <= m} cost(k) / k`` over the recorded buckets."""
        best = 0.0
        for k in self.call_histogram:
            if k <= m:
                best = max(best, self.measured_cost(k) / k)
        return m * best

    def as_dict(self) -> dict:
        return {
            "call_histogram": {str(k): v for k, v in sorted(self.call_histogram.items())},
            "total_calls": self.total_calls,
            "total_operand_bits": self.total_operand_bits,
            "bytes_moved": self.bytes_moved,
            "counters": dict(sorted(self.counters.items())),
            "recursion_trace": [r.as_dict() for r in self.trace()],
        }


def multiply(x: int, y: int, m: int, machine: MultMachine = BUILTIN,
             ledger: Optional[CostLedger] = None) -> int:
    """Exact product of two ``m``-bit non-negative integers, recorded as one call."""
    if m < 1:
        raise ValueError(f"size m must be >= 1, got {m}")
    if x < 0 or y < 0:
        raise ValueError("operands must be non-negative")
    if x >> m or y >> m:
        raise ValueError(f"operand exceeds {m} bits")
    if ledger is not None and ledger.timed:
        t0 = time.perf_counter_ns()
        r = machine.multiply(x, y)
        ledger.record_time(m, time.perf_counter_ns() - t0)
    else:
        r = machine.multiply(x, y)
    if ledger is not None:
        ledger.record_calls(m, 1, machine)
    return r


def _chunks(x: int, m: int, k: int) -> List[int]:
    mask = (1 << m) - 1
    return [(x >> (i * m)) & mask for i in range(k)]


def multiply_chunked(x: int, y: int, m: int, m_prime: int, machine: MultMachine = BUILTIN,
                     ledger: Optional[CostLedger] = None,
                     max_ratio: Optional[int] = DEFAULT_CHUNK_RATIO) -> int:
    """Multiply signed ``m_prime``-bit integers using only ``m``-bit machine calls.

    Each magnitude is cut into ``ceil(m_prime / m)`` chunks; every chunk pair
    goes through the machine (zero chunks included, so the call count is
    always ``ceil(m_prime / m)**2``) and the partial products are recombined
    with shifts.  ``max_ratio=None`` disables the ``m_prime <= C*m`` check.
    """
    if m < 1 or m_prime < 1:
        raise ValueError("m and m_prime must be positive")
    if max_ratio is not None and m_prime > max_ratio * m:
        raise ValueError(f"m_prime={m_prime} exceeds {max_ratio}*m (m={m})")
    ax, ay = abs(x), abs(y)
    if ax >> m_prime or ay >> m_prime:
        raise ValueError(f"operand exceeds {m_prime} bits")
    k = -(-m_prime // m)
    if _mpz is not None and machine.kind == "builtin":
        ax, ay = _mpz(ax), _mpz(ay)
    xs, ys = _chunks(ax, m, k), _chunks(ay, m, k)
    raw = _KINDS[machine.kind]
    diag = [0] * (2 * k - 1)
    timed = ledger is not None and ledger.timed
    t0 = time.perf_counter_ns() if timed else 0
    for i, a in enumerate(xs):
        for j, b in enumerate(ys):
            diag[i + j] += raw(a, b)
    if timed:
        ledger.record_time(m, time.perf_counter_ns() - t0)
    result = 0
    for d in reversed(diag):
        result = (result << m) + d
    result = int(result)
    if ledger is not None:
        ledger.record_calls(m, k * k, machine)
        ledger.count("chunked_products")
        ledger.chunked.append((m, m_prime, k * k))
    return -result if (x < 0) != (y < 0) else result


def gaussian_multiply(x, y, m: int, machine: MultMachine = BUILTIN,
                      ledger: Optional[CostLedger] = None,
                      m_prime: Optional[int] = None,
                      max_ratio: Optional[int] = DEFAULT_CHUNK_RATIO) -> GaussianInt:
    """Exact product of Gaussian integers via four chunked real products."""
    xr, xi = x
    yr, yi = y
    if m_prime is None:
        m_prime = max(1, abs(xr).bit_length(), abs(xi).bit_length(),
                      abs(yr).bit_length(), abs(yi).bit_length())
    if max_ratio is None and m_prime > DEFAULT_CHUNK_RATIO * m:
        log.debug("chunk ratio %d exceeds default bound", -(-m_prime // m))

    def mul(a, b):
        return multiply_chunked(a, b, m, m_prime, machine, ledger, max_ratio)

    rr, ii, ri, ir = mul(xr, yr), mul(xi, yi), mul(xr, yi), mul(xi, yr)
    if ledger is not None:
        ledger.count("gaussian_products")
    return GaussianInt(rr - ii, ri + ir)
