import functools
import random

import pytest
from hypothesis import given, settings, strategies as st

from multranspose.machines import CostLedger
from multranspose.numerics import lg, lg_iter
from multranspose.packed import PackedArray
from multranspose.schedulers import (StrategyConfig, chain_ell, ell_logarithmic_params,
                                     execute_plan, folklore_transpose, naive_transpose,
                                     nondyadic_lift, one_step, one_step_sizes, parse_strategy,
                                     recursion_plan, recursive_transpose, run_strategy,
                                     split_index_trace, split_plan)


def _rand(dims, b, seed=0):
    return PackedArray.random(dims, b, random.Random(seed))


def test_naive_small_cases():
    A = PackedArray.matrix([[1, 2], [3, 0]], 2)
    assert naive_transpose(A).rows() == [[1, 3], [2, 0]]
    R = PackedArray.matrix([[1, 2, 3]], 2)
    assert naive_transpose(R).bits == R.bits
    B = _rand((2, 3, 5, 2), 3)
    assert naive_transpose(naive_transpose(B)) == B


@pytest.mark.parametrize("n1,n2,b", [(2, 2, 1), (7, 3, 5), (3, 7, 5), (8, 8, 1), (1, 9, 2), (13, 1, 4)])
def test_folklore_equals_naive(n1, n2, b):
    A = _rand((2, n1, n2, 1), b, n1 * n2)
    assert folklore_transpose(A) == naive_transpose(A)


def test_folklore_movement_trend():
    moved = {}
    for n in (8, 16, 32, 64):
        ledger = CostLedger()
        folklore_transpose(_rand((1, n, n, 1), 1), ledger=ledger)
        moved[n] = ledger.bits_moved
        assert ledger.bits_moved == n * n * lg(n)
    for n in (8, 16, 32):
        ratio = moved[2 * n] / moved[n]
        assert ratio == pytest.approx(4 * lg(2 * n) / lg(n))


def test_split_plan_descriptors():
    plan = split_plan(8, 12, 2, 3, 5)
    assert [d.dims for d in plan.steps] == [(4, 2, 4, 3), (16, 2, 3, 1), (1, 4, 12, 2)]
    with pytest.raises(ValueError):
        split_plan(8, 12, 3, 3, 1)


def test_split_index_traces():
    plan = split_plan(4, 4, 2, 2, 1)
    assert split_index_trace(plan, 1, 2) == [6, 6, 5, 9]
    assert split_index_trace(plan, 3, 1) == [13, 11, 11, 7]


def test_split_trivial_outer_steps():
    plan = split_plan(6, 4, 6, 4, 2)
    assert plan.steps[0].dims == (1, 6, 1, 4)
    assert plan.steps[2].dims == (1, 1, 4, 6)


def test_split_composition_matches_index_algebra():
    n1, n2, n1p, n2p = 6, 4, 3, 2
    A = PackedArray.from_entries((1, n1, n2, 1), 5, list(range(24)))
    plan = split_plan(n1, n2, n1p, n2p, 5)
    X = A
    for step, d in enumerate(plan.steps, start=1):
        X = naive_transpose(X.reinterpret(d.dims, d.b))
        entries = X.entries()
        for i1 in range(n1):
            for i2 in range(n2):
                assert entries[split_index_trace(plan, i1, i2)[step]] == i1 * n2 + i2
    assert execute_plan(A, plan) == naive_transpose(A)


def test_one_step_sizes():
    assert one_step_sizes(256, 256, 1) == (8, 8, 8, 64)
    assert one_step_sizes(16, 2, 3)[:3] == (4, 4, 2)


def test_one_step_equals_naive():
    A = _rand((1, 64, 64, 1), 2)
    ledger = CostLedger()
    assert one_step(A, ledger=ledger) == naive_transpose(A)
    assert [(r.depth, r.n1, r.s) for r in ledger.trace()] == [(1, 64, 8), (2, 8, None)]


def test_one_step_skips_trivial_outer_step():
    A = _rand((1, 16, 2, 1), 1)
    ledger = CostLedger()
    assert one_step(A, ledger=ledger) == naive_transpose(A)
    # step (1) skipped since s = 4 >= n2 = 2; only step (3) uses multiplication
    assert ledger.counters["transpose_via_mult"] == 1


def test_one_step_rejects_nondyadic():
    with pytest.raises(ValueError):
        one_step(_rand((1, 6, 8, 1), 1))
    with pytest.raises(ValueError):
        one_step(_rand((1, 8, 8, 1), 3))


def test_chain_two_is_one_step():
    A = _rand((1, 32, 16, 1), 4, 3)
    assert chain_ell(A, 2) == one_step(A, inner=folklore_transpose)
    with pytest.raises(ValueError):
        chain_ell(A, 1)


def test_chain_three_256_and_levels():
    A = _rand((1, 256, 256, 1), 1, 4)
    ledger = CostLedger()
    assert chain_ell(A, 3, ledger=ledger) == naive_transpose(A)
    lgs = [lg(max(r.n1, r.n2)) for r in ledger.trace()]
    assert lgs == [lg_iter(256, j) for j in (1, 2, 3)]


def test_recursive_equals_naive():
    for dims, b in [((1, 64, 64, 1), 4), ((1, 2, 2, 1), 1), ((1, 32, 8, 1), 1), ((1, 4, 128, 1), 16)]:
        A = _rand(dims, b, 6)
        assert recursive_transpose(A) == naive_transpose(A)


def test_recursion_plan_trace():
    plan = recursion_plan(1 << 16, 1 << 16, 1)
    assert [lv["lg_max"] for lv in plan] == [16, 4, 2, 1]
    assert [lv["base"] for lv in plan] == [False, False, False, True]
    assert recursion_plan(2, 2, 1) == [{"depth": 1, "n1": 2, "n2": 2, "lg_max": 1, "s": 1, "base": True}]


@pytest.mark.parametrize("n1,n2,b", [(64, 64, 1), (16, 2, 1), (128, 32, 2), (8, 8, 8), (256, 4, 4)])
def test_recursion_plan_matches_execution(n1, n2, b):
    ledger = CostLedger()
    recursive_transpose(_rand((1, n1, n2, 1), b), ledger=ledger)
    plan = recursion_plan(n1, n2, b)
    assert [(r.depth, r.n1, r.n2, r.s, r.kind == "base") for r in ledger.trace()] == \
        [(lv["depth"], lv["n1"], lv["n2"], lv["s"], lv["base"]) for lv in plan]


def test_nondyadic_lift():
    A = _rand((1, 3, 5, 1), 3, 2)
    ledger = CostLedger()
    assert nondyadic_lift(A, recursive_transpose, ledger=ledger) == naive_transpose(A)
    assert ledger.trace()[0].n1 == 4 and ledger.trace()[0].n2 == 8 and ledger.trace()[0].b == 4
    D = _rand((1, 4, 8, 1), 2)
    assert nondyadic_lift(D, recursive_transpose) == naive_transpose(D)
    R = _rand((1, 1, 7, 1), 3)
    assert nondyadic_lift(R, recursive_transpose).bits == R.bits


def test_ell_logarithmic_params():
    assert ell_logarithmic_params(1 << 20, 1) == (228, 228, 20)
    assert ell_logarithmic_params(1 << 20, 2) == (457, 457, 5)
    assert ell_logarithmic_params(1, 1) == (1, 1, 1)


def test_strategy_config():
    assert parse_strategy("chain:3").ell == 3
    assert parse_strategy("chain:3").label == "chain:3"
    for bad in ("chain:1", "chain:x", "fast"):
        with pytest.raises(ValueError):
            parse_strategy(bad)
    with pytest.raises(ValueError):
        StrategyConfig("mult", machine="abacus")


@pytest.mark.parametrize("name", ["naive", "folklore", "mult", "onestep", "chain:2", "chain:3", "recursive"])
def test_run_strategy_general_arrays(name):
    for dims, b in [((2, 3, 5, 2), 3), ((1, 8, 4, 1), 2), ((3, 6, 6, 1), 1), ((1, 9, 1, 3), 5)]:
        A = _rand(dims, b, 11)
        assert run_strategy(A, parse_strategy(name)) == naive_transpose(A)


def test_run_strategy_without_lift():
    A = _rand((1, 6, 8, 1), 2)
    with pytest.raises(ValueError):
        run_strategy(A, parse_strategy("recursive", dyadic_lift=False))
    B = _rand((1, 8, 8, 1), 2)
    assert run_strategy(B, parse_strategy("recursive", dyadic_lift=False)) == naive_transpose(B)


def test_run_strategy_m_override():
    A = _rand((1, 4, 4, 1), 2)
    with pytest.raises(ValueError):
        run_strategy(A, parse_strategy("mult", m_override=31))
    ledger = CostLedger()
    assert run_strategy(A, parse_strategy("mult", m_override=64), ledger) == naive_transpose(A)
    assert all(m == 64 for m, _, _ in ledger.chunked)


def test_level_sizes_stay_within_m():
    n, b = 128, 2
    ledger = CostLedger()
    recursive_transpose(_rand((1, n, n, 1), b), ledger=ledger)
    for r in ledger.trace():
        assert r.s <= n * n <= n * n * b
        assert r.m <= n * n * b


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 24), st.integers(1, 24), st.integers(1, 16),
       st.sampled_from(["folklore", "onestep", "chain:3", "recursive"]), st.integers(0, 2**32))
def test_every_strategy_is_a_transpose(n1, n2, b, name, seed):
    A = _rand((1, n1, n2, 1), b, seed)
    assert run_strategy(A, parse_strategy(name)) == naive_transpose(A)
