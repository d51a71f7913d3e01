"""Command-line entry point: ``transpose``, ``verify`` and ``bench``.

Exit status is 0 on success, 1 when verification finds a violation and 2
for usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from typing import List, Optional

from .fileformat import FormatError, read_matrix, write_matrix
from .harness import (DEFAULT_GRID, DEFAULT_STRATEGIES, cost_report, parse_grid, run_bench,
                      run_verify, write_bench_csv)
from .kronecker import PackingError
from .machines import MACHINES, CostLedger
from .reduction import DecodeError
from .schedulers import parse_strategy, run_strategy

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multranspose",
                     description="Transpose bit-packed matrices with big-integer multiplication.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("transpose", help="transpose a matrix file")
    t.add_argument("--in", dest="infile", required=True, help="input matrix file")
    t.add_argument("--out", dest="outfile", required=True, help="output matrix file")
    t.add_argument("--strategy", default="mult",
                   help="naive | folklore | mult | onestep | chain:L | recursive (default: mult)")
    t.add_argument("--machine", default="builtin", choices=sorted(MACHINES))
    t.add_argument("--small-machine", choices=sorted(MACHINES),
                   help="machine for the small fixed-point products (default: --machine)")
    t.add_argument("--no-dyadic-lift", action="store_true",
                   help="reject non power-of-two parameters instead of padding them")
    t.add_argument("--m", type=int, help="multiplication size (default: bits in the matrix)")
    t.add_argument("--report", help="write a JSON cost report here ('-' for stdout)")

    v = sub.add_parser("verify", help="run the invariant suites")
    v.add_argument("--grid", default=DEFAULT_GRID,
                   help=f"grid spec, e.g. 'n1=1-4;n2=2,8;b=1,8' (default: {DEFAULT_GRID!r})")
    v.add_argument("--seeds", type=int, default=2)
    v.add_argument("--strategies", default=",".join(DEFAULT_STRATEGIES),
                   help="comma-separated strategies for the oracle suite")
    v.add_argument("--no-dyadic-lift", action="store_true")
    v.add_argument("--fault", action="store_true",
                   help="flip one bit of the packed product in every run; must be caught")

    b = sub.add_parser("bench", help="benchmark strategies over a grid, CSV output")
    b.add_argument("--grid", required=True,
                   help="grid spec; may include 'strategy=folklore,recursive'")
    b.add_argument("--csv", required=True, help="output CSV file ('-' for stdout)")
    b.add_argument("--strategies", help="comma-separated strategies (overrides the grid)")
    b.add_argument("--machine", default="builtin", choices=sorted(MACHINES))
    b.add_argument("--seed", type=int, default=0)
    return parser


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_transpose(args) -> int:
    config = parse_strategy(args.strategy, machine=args.machine, small_machine=args.small_machine,
                            dyadic_lift=not args.no_dyadic_lift, m_override=args.m)
    A = read_matrix(args.infile)
    ledger = CostLedger()
    t0 = time.perf_counter()
    T = run_strategy(A, config, ledger)
    elapsed = time.perf_counter() - t0
    write_matrix(args.outfile, T)
    if args.report:
        report = cost_report(config, A, ledger, elapsed)
        _write_text(args.report, json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def _cmd_verify(args) -> int:
    points, grid_strategies = parse_grid(args.grid)
    strategies = grid_strategies or [s for s in args.strategies.split(",") if s]
    for name in strategies:
        parse_strategy(name)
    if args.seeds < 1:
        raise ValueError("--seeds must be positive")
    results = run_verify(points, args.seeds, strategies, lift=not args.no_dyadic_lift,
                         fault=args.fault, out=sys.stdout)
    failed = sum(r.failed for r in results)
    print("verify: " + ("FAIL" if failed else "PASS"))
    return EXIT_VERIFY if failed else EXIT_OK


def _cmd_bench(args) -> int:
    points, grid_strategies = parse_grid(args.grid)
    if args.strategies:
        strategies = [s for s in args.strategies.split(",") if s]
    else:
        strategies = grid_strategies or ["mult"]
    for name in strategies:
        parse_strategy(name)
    rows = run_bench(points, strategies, machine=args.machine, seed=args.seed)
    if args.csv == "-":
        write_bench_csv(rows, sys.stdout)
    else:
        with open(args.csv, "w", newline="") as fh:
            write_bench_csv(rows, fh)
    return EXIT_OK


_COMMANDS = {"transpose": _cmd_transpose, "verify": _cmd_verify, "bench": _cmd_bench}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except FormatError as exc:
        print(f"error: malformed matrix file: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (DecodeError, PackingError) as exc:
        print(f"error: internal check failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
