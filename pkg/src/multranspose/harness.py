"""Verification suites, benchmark grids and cost reports behind the CLI."""

from __future__ import annotations

import csv
import itertools
import logging
import random
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, TextIO

from .kronecker import PackingError
from .machines import CostLedger
from .numerics import GaussianInt, lg_iter, lg_star
from .packed import PackedArray
from .reduction import DecodeError, precision_for, transpose_via_mult
from .schedulers import (StrategyConfig, naive_transpose, parse_strategy,
                         recursion_plan, run_strategy)

log = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_GRID",
    "DEFAULT_STRATEGIES",
    "BENCH_COLUMNS",
    "GridPoint",
    "CaseFailure",
    "SuiteResult",
    "parse_grid",
    "cost_report",
    "depth_bound",
    "make_bit_flip_fault",
    "run_verify",
    "run_bench",
    "write_bench_csv",
]

DEFAULT_GRID = "n1=1,2,3,4,8;n2=1,2,5,8;b=1,4,8"
DEFAULT_STRATEGIES = ("folklore", "mult", "onestep", "chain:2", "chain:3", "recursive")
CASCADE_LIMITS = {"S": 12, "U": 24, "V": 28, "W": 40}
BENCH_COLUMNS = ("strategy", "l1", "n1", "n2", "l2", "b", "transpose_calls", "gaussian_products",
                 "large_mults", "machine_calls", "total_operand_bits", "bytes_moved", "depth",
                 "wall_time_s")


@dataclass(frozen=True)
class GridPoint:
    n1: int
    n2: int
    b: int
    l1: int = 1
    l2: int = 1

    @property
    def dims(self):
        return (self.l1, self.n1, self.n2, self.l2)

    def label(self) -> str:
        return f"l1={self.l1} n1={self.n1} n2={self.n2} l2={self.l2} b={self.b}"


def _parse_values(key: str, text: str) -> List:
    if key == "strategy":
        return [t for t in text.split(",") if t]
    out = []
    for tok in filter(None, text.split(",")):
        lo, sep, hi = tok.partition("-")
        try:
            if sep:
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(tok))
        except ValueError:
            raise ValueError(f"grid: bad value {tok!r} for {key}") from None
    if any(v < 1 for v in out):
        raise ValueError(f"grid: {key} values must be positive")
    return out


def parse_grid(spec: str):
    """Parse ``"n1=1-4;n2=2,8;b=1,8"`` into grid points and an optional strategy list.

    Keys are ``n1, n2, n`` (square shorthand), ``b, l1, l2`` and
    ``strategy``; values are comma lists with ``a-b`` ranges.  A blank
    spec is an empty grid.
    """
    if not spec.strip():
        return [], None
    fields: Dict[str, list] = {}
    for part in filter(None, (s.strip() for s in spec.split(";"))):
        key, eq, value = part.partition("=")
        key = key.strip()
        if not eq or key not in ("n1", "n2", "n", "b", "l1", "l2", "strategy"):
            raise ValueError(f"grid: cannot parse {part!r}")
        fields[key] = _parse_values(key, value.strip())
    strategies = fields.pop("strategy", None)
    if "n" in fields:
        if "n1" in fields or "n2" in fields:
            raise ValueError("grid: use either n or n1/n2")
        pairs = [(v, v) for v in fields.pop("n")]
    else:
        pairs = list(itertools.product(fields.get("n1", [1]), fields.get("n2", [1])))
    points = [GridPoint(n1, n2, b, l1, l2)
              for (n1, n2), b, l1, l2 in itertools.product(
                  pairs, fields.get("b", [1]), fields.get("l1", [1]), fields.get("l2", [1]))]
    return points, strategies


def depth_bound(n1: int, n2: int, b: int) -> int:
    """Allowed recursion depth ``max(1, lg* max(n1, n2) - lg* b + 1)``."""
    return max(1, lg_star(max(n1, n2)) - lg_star(b) + 1)


def cost_report(config: StrategyConfig, A: PackedArray, ledger: CostLedger,
                wall_time: float) -> dict:
    l1, n1, n2, l2 = A.dims
    report = {"strategy": config.label, "machine": config.machine,
              "params": {"l1": l1, "n1": n1, "n2": n2, "l2": l2, "b": A.width,
                         "m": config.m_override or A.nbits}}
    report.update(ledger.as_dict())
    report["wall_time"] = wall_time
    return report


def make_bit_flip_fault(b: int, n2: int):
    """Fault hook that flips one bit of the final packed product's imaginary part.

    The flipped bit sits in the slot of output ``t = 0`` (post-scaling factor
    exactly 1) at height ``2p - b + 1``, which shifts that decoded entry's
    imaginary part by about ``2*n2`` units, so rounding must refuse it.
    """

    def fault(w: GaussianInt, beta: int, wspec) -> GaussianInt:
        n1 = (wspec.count + 2) // 3
        p = precision_for(b, n1 * n2)
        slot = (n1 - 1) * wspec.stride
        return GaussianInt(w.re, w.im ^ (1 << (slot * beta + 2 * p - b + 1)))

    return fault


@dataclass
class CaseFailure:
    suite: str
    point: GridPoint
    seed: int
    detail: str

    def __str__(self) -> str:
        return f"[{self.suite}] {self.point.label()} seed={self.seed}: {self.detail}"


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failures: List[CaseFailure] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return len(self.failures)

    def summary(self) -> str:
        return f"{self.name}: {self.passed} passed, {self.failed} failed"


def _oracle_suite(points, seeds, strategies, lift: bool) -> SuiteResult:
    res = SuiteResult("oracle")
    for pt, seed in itertools.product(points, range(seeds)):
        A = PackedArray.random(pt.dims, pt.b, random.Random(seed))
        ref = naive_transpose(A)
        for name in strategies:
            try:
                out = run_strategy(A, parse_strategy(name, dyadic_lift=lift))
            except (DecodeError, PackingError) as exc:
                res.failures.append(CaseFailure("oracle", pt, seed, f"{name}: {exc}"))
                continue
            if out != ref:
                res.failures.append(CaseFailure("oracle", pt, seed, f"{name}: output differs"))
            else:
                res.passed += 1
    return res


def _cascade_suite(points, seeds, max_n: int) -> SuiteResult:
    from .oracles import cascade_errors

    res = SuiteResult("cascade")
    for pt, seed in itertools.product(points, range(seeds)):
        n = pt.n1 * pt.n2
        if n > max_n or pt.n1 == 1 or pt.n2 == 1:
            continue
        A = PackedArray.random(pt.dims, pt.b, random.Random(seed))
        trace: dict = {}
        try:
            transpose_via_mult(A, trace=trace)
        except (DecodeError, PackingError) as exc:
            res.failures.append(CaseFailure("cascade", pt, seed, str(exc)))
            continue
        errs = cascade_errors(A, trace)
        bad = [f"eps({k})={errs[k]:.3g} >= {c}n^2" for k, c in CASCADE_LIMITS.items()
               if not errs[k] < c * n * n]
        if not errs["round_dist"] < 0.5:
            bad.append(f"rounding distance {errs['round_dist']}")
        if bad:
            res.failures.append(CaseFailure("cascade", pt, seed, "; ".join(bad)))
        else:
            res.passed += 1
    return res


def _depth_suite(points) -> SuiteResult:
    res = SuiteResult("depth")
    for pt in points:
        n1, n2, b = (1 << (x - 1).bit_length() for x in (pt.n1, pt.n2, pt.b * pt.l2))
        plan = recursion_plan(n1, n2, b)
        bad = []
        if len(plan) > depth_bound(n1, n2, b):
            bad.append(f"depth {len(plan)} exceeds bound {depth_bound(n1, n2, b)}")
        top = max(n1, n2)
        for level in plan:
            if level["lg_max"] != lg_iter(top, level["depth"]):
                bad.append(f"level {level['depth']}: lg max = {level['lg_max']}")
        A = PackedArray.random((1, n1, n2, 1), b, random.Random(0))
        ledger = CostLedger()
        run_strategy(A, StrategyConfig("recursive"), ledger)
        if [r.depth for r in ledger.trace()] != [lv["depth"] for lv in plan]:
            bad.append("recorded levels differ from the plan")
        if bad:
            res.failures.append(CaseFailure("depth", pt, 0, "; ".join(bad)))
        else:
            res.passed += 1
    return res


def _fault_suite(points, seeds) -> SuiteResult:
    """Every case must fail loudly; a silent pass is a failure of the suite."""
    res = SuiteResult("fault")
    for pt, seed in itertools.product(points, range(seeds)):
        if pt.n1 == 1 or pt.n2 == 1:
            continue
        A = PackedArray.random(pt.dims, pt.b, random.Random(seed))
        try:
            out = transpose_via_mult(A, fault=make_bit_flip_fault(pt.b, pt.n2))
        except (DecodeError, PackingError) as exc:
            res.failures.append(CaseFailure("fault", pt, seed, f"detected: {exc}"))
            continue
        if out != naive_transpose(A):
            res.failures.append(CaseFailure("fault", pt, seed, "wrong output not flagged by decoding"))
        else:
            res.failures.append(CaseFailure("fault", pt, seed, "fault had no effect"))
    return res


def run_verify(points: Sequence[GridPoint], seeds: int = 2,
               strategies: Optional[Sequence[str]] = None, lift: bool = True,
               fault: bool = False, max_cascade_n: int = 256,
               out: Optional[TextIO] = None) -> List[SuiteResult]:
    """Run the invariant suites and print one summary line per suite.

    With ``fault=True`` a bit of the final packed product is flipped in
    every multiplication-based run; each such run is reported as a failure.
    """
    def say(msg):
        if out is not None:
            print(msg, file=out)

    if not points:
        log.warning("empty grid: nothing to verify")
        say("warning: empty grid, nothing verified")
        return []
    if fault:
        results = [_fault_suite(points, seeds)]
    else:
        strategies = list(strategies or DEFAULT_STRATEGIES)
        results = [_oracle_suite(points, seeds, strategies, lift),
                   _cascade_suite(points, seeds, max_cascade_n),
                   _depth_suite(points)]
    for r in results:
        say(r.summary())
        for f in r.failures:
            say(f"  {f}")
    return results


def run_bench(points: Sequence[GridPoint], strategies: Iterable[str],
              machine: str = "builtin", seed: int = 0) -> List[dict]:
    """One row per (strategy, grid point): ledger counters and wall time."""
    rows = []
    for name, pt in itertools.product(list(strategies), points):
        config = parse_strategy(name, machine=machine)
        A = PackedArray.random(pt.dims, pt.b, random.Random(seed))
        ledger = CostLedger()
        t0 = time.perf_counter()
        run_strategy(A, config, ledger)
        elapsed = time.perf_counter() - t0
        c = ledger.counters
        rows.append({
            "strategy": config.label, "l1": pt.l1, "n1": pt.n1, "n2": pt.n2, "l2": pt.l2,
            "b": pt.b, "transpose_calls": c["transpose_via_mult"],
            "gaussian_products": c["gaussian_products"], "large_mults": c["chunked_products"],
            "machine_calls": ledger.total_calls, "total_operand_bits": ledger.total_operand_bits,
            "bytes_moved": ledger.bytes_moved, "depth": len(ledger.levels),
            "wall_time_s": f"{elapsed:.6f}",
        })
    return rows


def write_bench_csv(rows: Sequence[dict], fh: TextIO) -> None:
    writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
    writer.writeheader()
    writer.writerows(rows)
