"""Transposition strategies: baselines, the three-step split, and the recursive reducers.

Every strategy takes a :class:`PackedArray` and keyword options
``m, machine, small_machine, ledger, depth`` and returns the array with its
middle axes swapped.  The dyadic strategies (``one_step``, ``chain_ell``,
``recursive_transpose``) work on plain matrices (``l1 == l2 == 1``) whose
dimensions and entry width are powers of two; :func:`run_strategy` adapts
arbitrary arrays to them.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

from .machines import BUILTIN, CostLedger, MultMachine, get_machine
from .numerics import lg, lg_iter
from .packed import PackedArray, pack_entries, unpack_entries
from .reduction import TransposeParams, transpose_via_mult

__all__ = [
    "STRATEGIES",
    "StrategyConfig",
    "SubproblemPlan",
    "Descriptor",
    "is_dyadic",
    "naive_transpose",
    "folklore_transpose",
    "split_plan",
    "split_index_trace",
    "execute_plan",
    "one_step_sizes",
    "one_step",
    "chain_ell",
    "recursion_plan",
    "recursive_transpose",
    "nondyadic_lift",
    "ell_logarithmic_params",
    "mult_transpose",
    "run_strategy",
    "parse_strategy",
]

Strategy = Callable[..., PackedArray]


def is_dyadic(x: int) -> bool:
    return x >= 1 and x & (x - 1) == 0


def _ceil_pow2(x: int) -> int:
    return 1 << (x - 1).bit_length()


# --- baselines ------------------------------------------------------------

def naive_transpose(A: PackedArray, **_) -> PackedArray:
    """Direct index shuffle; the ground truth for everything else."""
    l1, n1, n2, l2 = A.dims
    w = A.width * l2
    e = unpack_entries(A.bits, l1 * n1 * n2, w)
    out = []
    for i1 in range(l1):
        base = i1 * n1 * n2
        for j2 in range(n2):
            out.extend(e[base + j1 * n2 + j2] for j1 in range(n1))
    return PackedArray((l1, n2, n1, l2), A.width, pack_entries(out, w))


def _folklore_rows(rows: List[list], ledger, width: int) -> List[list]:
    """Transpose a list of rows by halving the shorter side and interleaving."""
    n1, n2 = len(rows), len(rows[0])
    if n1 == 1:
        return [[e] for e in rows[0]]
    if n2 == 1:
        return [[r[0] for r in rows]]
    if n1 <= n2:
        h = n1 // 2
        top = _folklore_rows(rows[:h], ledger, width)
        bottom = _folklore_rows(rows[h:], ledger, width)
        if ledger is not None:
            ledger.move(n1 * n2 * width)
        return [t + u for t, u in zip(top, bottom)]
    # reverse direction: split columns, transpose each half, stack
    h = n2 // 2
    if ledger is not None:
        ledger.move(n1 * n2 * width)
    left = _folklore_rows([r[:h] for r in rows], ledger, width)
    right = _folklore_rows([r[h:] for r in rows], ledger, width)
    return left + right


def folklore_transpose(A: PackedArray, ledger: Optional[CostLedger] = None,
                       depth: int = 1, m: Optional[int] = None, **_) -> PackedArray:
    """Recursive halve-and-interleave transposition of each of the ``l1`` matrices."""
    l1, n1, n2, l2 = A.dims
    w = A.width * l2
    if ledger is not None:
        ledger.record_level(depth, n1, n2, A.width, None, m or A.nbits, "folklore")
    e = unpack_entries(A.bits, l1 * n1 * n2, w)
    out = []
    for i1 in range(l1):
        base = i1 * n1 * n2
        rows = [e[base + r * n2:base + (r + 1) * n2] for r in range(n1)]
        for row in _folklore_rows(rows, ledger, w):
            out.extend(row)
    return PackedArray((l1, n2, n1, l2), A.width, pack_entries(out, w))


def mult_transpose(A: PackedArray, m: Optional[int] = None, machine: MultMachine = BUILTIN,
                   small_machine: Optional[MultMachine] = None,
                   ledger: Optional[CostLedger] = None, depth: int = 1, **_) -> PackedArray:
    """The multiplication reduction applied directly to the whole array."""
    if ledger is not None:
        ledger.record_level(depth, A.dims[1], A.dims[2], A.width, None, m or A.nbits, "mult")
    return transpose_via_mult(A, TransposeParams.for_array(A, m), machine, small_machine, ledger)


# --- three-step decomposition --------------------------------------------

@dataclass(frozen=True)
class Descriptor:
    """Generalised transposition problem ``(l1, n1, n2, l2; b)``."""

    l1: int
    n1: int
    n2: int
    l2: int
    b: int
    note: str = ""

    @property
    def dims(self) -> Tuple[int, int, int, int]:
        return (self.l1, self.n1, self.n2, self.l2)


@dataclass(frozen=True)
class SubproblemPlan:
    n1: int
    n2: int
    n1_prime: int
    n2_prime: int
    b: int
    steps: Tuple[Descriptor, Descriptor, Descriptor]


def split_plan(n1: int, n2: int, n1_prime: int, n2_prime: int, b: int) -> SubproblemPlan:
    """The three generalised transpositions that together transpose ``n1 x n2``.

    Writing ``i1 = j1*n1' + k1`` and ``i2 = j2*n2' + k2``: step 1 swaps
    ``k1`` with ``j2``, step 2 swaps ``k1`` with ``k2``, step 3 swaps ``j1``
    with ``i2``.
    """
    if n1_prime < 1 or n2_prime < 1 or n1 % n1_prime or n2 % n2_prime:
        raise ValueError(f"n1'={n1_prime} must divide n1={n1} and n2'={n2_prime} must divide n2={n2}")
    steps = (
        Descriptor(n1 // n1_prime, n1_prime, n2 // n2_prime, n2_prime, b, "swap k1 and j2"),
        Descriptor(n1 * n2 // (n1_prime * n2_prime), n1_prime, n2_prime, 1, b, "swap k1 and k2"),
        Descriptor(1, n1 // n1_prime, n2, n1_prime, b, "swap j1 and i2"),
    )
    return SubproblemPlan(n1, n2, n1_prime, n2_prime, b, steps)


def split_index_trace(plan: SubproblemPlan, i1: int, i2: int) -> List[int]:
    """Flat position of entry ``(i1, i2)`` initially and after each of the three steps."""
    n1p, n2p, n2 = plan.n1_prime, plan.n2_prime, plan.n2
    j1, k1 = divmod(i1, n1p)
    j2, k2 = divmod(i2, n2p)
    return [
        i1 * n2 + i2,
        j1 * (n1p * n2) + j2 * (n1p * n2p) + k1 * n2p + k2,
        j1 * (n1p * n2) + i2 * n1p + k1,
        i2 * plan.n1 + i1,
    ]


def execute_plan(A: PackedArray, plan: SubproblemPlan,
                 step_fn: Strategy = naive_transpose) -> PackedArray:
    """Run the three steps of ``plan`` on an ``n1 x n2`` matrix with ``step_fn``."""
    X = A
    for d in plan.steps:
        X = step_fn(X.reinterpret(d.dims, d.b))
    return X.reinterpret((1, plan.n2, plan.n1, 1), plan.b)


def _require_dyadic_matrix(A: PackedArray) -> None:
    l1, n1, n2, l2 = A.dims
    if l1 != 1 or l2 != 1:
        raise ValueError("dyadic strategies take plain matrices (l1 == l2 == 1)")
    if not (is_dyadic(n1) and is_dyadic(n2) and is_dyadic(A.width)):
        raise ValueError(f"non-dyadic parameters n1={n1}, n2={n2}, b={A.width}")


def one_step_sizes(n1: int, n2: int, b: int) -> Tuple[int, int, int, int]:
    """``(s, n1', n2', m')`` with ``s = 2**lg lg max(n1, n2)``."""
    s = 1 << lg(lg(max(n1, n2)))
    n1p, n2p = min(n1, s), min(n2, s)
    return s, n1p, n2p, n1p * n2p * b


def one_step(A: PackedArray, inner: Strategy = folklore_transpose, m: Optional[int] = None,
             machine: MultMachine = BUILTIN, small_machine: Optional[MultMachine] = None,
             ledger: Optional[CostLedger] = None, depth: int = 1) -> PackedArray:
    """One level of the split with ``n1', n2' <= s``.

    The outer steps move whole groups of ``s`` entries, so they are run as
    multiplication-based transpositions on ``s``-bit entries; the inner
    ``n1' x n2'`` blocks go to ``inner``.
    """
    _require_dyadic_matrix(A)
    _, n1, n2, _ = A.dims
    b = A.width
    m = m or n1 * n2 * b
    if n1 * n2 * b > m:
        raise ValueError(f"n1*n2*b exceeds m = {m}")
    s, n1p, n2p, m_inner = one_step_sizes(n1, n2, b)
    if ledger is not None:
        ledger.record_level(depth, n1, n2, b, s, m, "one_step")
    kw = dict(machine=machine, small_machine=small_machine, ledger=ledger)
    X = A
    # step (1): (n1/n1', n1', n2/s, s; b) viewed as (n1/n1', n1', n2/s, b; s)
    if s < n2:
        X = transpose_via_mult(X.reinterpret((n1 // n1p, n1p, n2 // s, b), s),
                               TransposeParams(n1 // n1p, n1p, n2 // s, b, s, m),
                               machine, small_machine, ledger)
    # step (2): independent n1' x n2' blocks
    blocks = n1 * n2 // (n1p * n2p)
    block_bits = n1p * n2p * b
    mask = (1 << block_bits) - 1
    bits = X.bits
    out = []
    for k in range(blocks):
        blk = PackedArray((1, n1p, n2p, 1), b, (bits >> (k * block_bits)) & mask)
        out.append(inner(blk, m=m_inner, depth=depth + 1, **kw).bits)
    X = PackedArray((1, n1 * n2 // n1p, n1p, 1), b, pack_entries(out, block_bits) if blocks > 1 else out[0])
    # step (3): (1, n1/s, n2, s; b) viewed as (1, n1/s, n2, b; s)
    if s < n1:
        X = transpose_via_mult(X.reinterpret((1, n1 // n1p, n2, b), s),
                               TransposeParams(1, n1 // n1p, n2, b, s, m),
                               machine, small_machine, ledger)
    return X.reinterpret((1, n2, n1, 1), b)


def chain_ell(A: PackedArray, ell: int, m: Optional[int] = None,
              machine: MultMachine = BUILTIN, small_machine: Optional[MultMachine] = None,
              ledger: Optional[CostLedger] = None, depth: int = 1) -> PackedArray:
    """``ell - 1`` nested :func:`one_step` levels with folklore at the bottom."""
    if ell < 2:
        raise ValueError(f"chain needs ell >= 2, got {ell}")
    _require_dyadic_matrix(A)
    inner: Strategy = folklore_transpose
    for _ in range(ell - 2):
        inner = functools.partial(one_step, inner=inner)
    return one_step(A, inner, m=m, machine=machine, small_machine=small_machine,
                    ledger=ledger, depth=depth)


def _base_group(n1: int, n2: int, b: int) -> int:
    # s | b needs s <= b; for b = 1 the group size is capped at 1
    return min(1 << lg(lg(max(n1, n2))), b)


def recursion_plan(n1: int, n2: int, b: int) -> List[dict]:
    """Levels visited by :func:`recursive_transpose`, computed without touching data.

    Each level reports ``lg max(n1, n2)``, the group size ``s`` and whether
    it is the base case.
    """
    levels = []
    depth = 1
    while lg(max(n1, n2)) > b:
        s, n1p, n2p, _ = one_step_sizes(n1, n2, b)
        levels.append({"depth": depth, "n1": n1, "n2": n2, "lg_max": lg(max(n1, n2)),
                       "s": s, "base": False})
        n1, n2 = n1p, n2p
        depth += 1
    levels.append({"depth": depth, "n1": n1, "n2": n2, "lg_max": lg(max(n1, n2)),
                   "s": _base_group(n1, n2, b), "base": True})
    return levels


def recursive_transpose(A: PackedArray, m: Optional[int] = None,
                        machine: MultMachine = BUILTIN, small_machine: Optional[MultMachine] = None,
                        ledger: Optional[CostLedger] = None, depth: int = 1) -> PackedArray:
    """Split until ``lg max(n1, n2) <= b``, then finish with one reduction on ``s``-bit entries."""
    _require_dyadic_matrix(A)
    _, n1, n2, _ = A.dims
    b = A.width
    m = m or n1 * n2 * b
    if lg(max(n1, n2)) > b:
        return one_step(A, recursive_transpose, m=m, machine=machine, small_machine=small_machine,
                        ledger=ledger, depth=depth)
    s = _base_group(n1, n2, b)
    if ledger is not None:
        ledger.record_level(depth, n1, n2, b, s, m, "base")
    X = A.reinterpret((1, n1, n2, b // s), s)
    X = transpose_via_mult(X, TransposeParams(1, n1, n2, b // s, s, m), machine, small_machine, ledger)
    return X.reinterpret((1, n2, n1, 1), b)


def nondyadic_lift(A: PackedArray, inner: Strategy, m: Optional[int] = None,
                   ledger: Optional[CostLedger] = None, **kw) -> PackedArray:
    """Zero-pad ``n1, n2, b`` to powers of two, run ``inner``, strip the padding."""
    l1, n1, n2, l2 = A.dims
    if l1 != 1 or l2 != 1:
        raise ValueError("nondyadic_lift takes plain matrices (l1 == l2 == 1)")
    b = A.width
    m = m or n1 * n2 * b
    t1, t2, tb = _ceil_pow2(n1), _ceil_pow2(n2), _ceil_pow2(b)
    if (t1, t2, tb) == (n1, n2, b):
        return inner(A, m=m, ledger=ledger, **kw)
    rows = A.rows()
    padded = [row + [0] * (t2 - n2) for row in rows] + [[0] * t2 for _ in range(t1 - n1)]
    P = PackedArray.matrix(padded, tb)
    if ledger is not None:
        ledger.move(2 * t1 * t2 * tb)
    T = inner(P, m=8 * m, ledger=ledger, **kw).rows()
    return PackedArray.matrix([row[:n1] for row in T[:n2]], b)


def ell_logarithmic_params(m: int, ell: int) -> Tuple[int, int, int]:
    """``(n1, n2, b)`` with ``b = lg^(ell)(m)`` and ``n1 = n2 = floor(sqrt(m / b))``."""
    if m < 1 or ell < 1:
        raise ValueError("m and ell must be positive")
    b = lg_iter(m, ell)
    n = math.isqrt(m // b)
    return n, n, b


# --- dispatch ---------------------------------------------------------------

STRATEGIES = ("naive", "folklore", "mult", "onestep", "chain", "recursive")


@dataclass(frozen=True)
class StrategyConfig:
    strategy: str = "mult"
    ell: Optional[int] = None
    machine: str = "builtin"
    small_machine: Optional[str] = None
    dyadic_lift: bool = True
    m_override: Optional[int] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "chain" and (self.ell is None or self.ell < 2):
            raise ValueError("chain strategy needs ell >= 2")
        get_machine(self.machine)
        if self.small_machine:
            get_machine(self.small_machine)

    @property
    def label(self) -> str:
        return f"chain:{self.ell}" if self.strategy == "chain" else self.strategy


def parse_strategy(text: str, **kw) -> StrategyConfig:
    """``naive|folklore|mult|onestep|chain:L|recursive`` to a config."""
    if text.startswith("chain:"):
        try:
            ell = int(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad chain length in {text!r}") from None
        return StrategyConfig("chain", ell=ell, **kw)
    return StrategyConfig(text, **kw)


def _dyadic_fn(config: StrategyConfig) -> Strategy:
    if config.strategy == "onestep":
        return functools.partial(one_step, inner=folklore_transpose)
    if config.strategy == "chain":
        return functools.partial(chain_ell, ell=config.ell)
    return recursive_transpose


def run_strategy(A: PackedArray, config: StrategyConfig,
                 ledger: Optional[CostLedger] = None) -> PackedArray:
    """Transpose any 4-D array with the configured strategy.

    Dyadic strategies see each of the ``l1`` matrices separately with the
    ``l2`` trailing entries fused into one wider entry, padded to powers of
    two when lifting is enabled.
    """
    machine = get_machine(config.machine)
    small = get_machine(config.small_machine) if config.small_machine else None
    m = config.m_override
    if m is not None and m < A.nbits:
        raise ValueError(f"m = {m} is smaller than the array ({A.nbits} bits)")
    if config.strategy == "naive":
        return naive_transpose(A)
    if config.strategy == "folklore":
        return folklore_transpose(A, ledger=ledger, m=m)
    if config.strategy == "mult":
        return mult_transpose(A, m=m, machine=machine, small_machine=small, ledger=ledger)

    fn = _dyadic_fn(config)
    l1, n1, n2, l2 = A.dims
    w = A.width * l2
    dyadic = is_dyadic(n1) and is_dyadic(n2) and is_dyadic(w)
    if not dyadic and not config.dyadic_lift:
        raise ValueError(f"strategy {config.label} needs dyadic n1, n2, b (got {n1}, {n2}, {w}); "
                         "enable lifting")
    kw = dict(machine=machine, small_machine=small, ledger=ledger)
    mat_bits = n1 * n2 * w
    m_each = m // l1 if m else None
    outs = []
    for i1 in range(l1):
        M = PackedArray((1, n1, n2, 1), w, (A.bits >> (i1 * mat_bits)) & ((1 << mat_bits) - 1))
        if dyadic:
            T = fn(M, m=m_each, **kw)
        else:
            T = nondyadic_lift(M, fn, m=m_each, **kw)
        outs.append(T.bits)
    return PackedArray((l1, n2, n1, l2), A.width, pack_entries(outs, mat_bits))
