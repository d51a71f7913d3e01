import random

import pytest
from hypothesis import given, settings, strategies as st

from multranspose.machines import (BUILTIN, KARATSUBA, MACHINES, SCHOOLBOOK, CostLedger,
                                   bucket_of, gaussian_multiply, get_machine, multiply,
                                   multiply_chunked)
from multranspose.numerics import GaussianInt


@pytest.mark.parametrize("machine", [BUILTIN, SCHOOLBOOK, KARATSUBA])
@given(st.integers(0, 1 << 3000), st.integers(0, 1 << 3000))
@settings(max_examples=40, deadline=None)
def test_machines_agree_with_python(machine, x, y):
    assert machine.multiply(x, y) == x * y


@pytest.mark.parametrize("machine", [SCHOOLBOOK, KARATSUBA])
def test_signed_multiply(machine):
    mul = machine.signed_multiply
    for x, y in [(-3, 5), (3, -5), (-7, -9), (0, -4), (1 << 700, -(1 << 650) - 1)]:
        assert mul(x, y) == x * y


def test_machines_reject_negative():
    with pytest.raises(ValueError):
        SCHOOLBOOK.multiply(-1, 2)


def test_get_machine():
    assert get_machine("karatsuba") is KARATSUBA
    assert set(MACHINES) == {"builtin", "schoolbook", "karatsuba"}
    with pytest.raises(ValueError):
        get_machine("fft")


def test_bucket_of():
    assert [bucket_of(m) for m in (1, 2, 3, 64, 65, 1000)] == [1, 2, 4, 64, 128, 1024]


def test_multiply_records_one_call():
    ledger = CostLedger()
    assert multiply(200, 100, 8, ledger=ledger) == 20000
    assert ledger.call_histogram == {8: 1}
    assert ledger.total_operand_bits == 16
    with pytest.raises(ValueError):
        multiply(256, 1, 8)


@given(st.integers(-(1 << 999), 1 << 999), st.integers(-(1 << 999), 1 << 999),
       st.integers(16, 400))
@settings(max_examples=60, deadline=None)
def test_chunked_product_exact(x, y, m):
    ledger = CostLedger()
    k = -(-1000 // m)
    assert multiply_chunked(x, y, m, 1000, ledger=ledger, max_ratio=None) == x * y
    assert ledger.total_calls == k * k
    assert ledger.chunked == [(m, 1000, k * k)]


@pytest.mark.parametrize("machine", [SCHOOLBOOK, KARATSUBA])
def test_chunked_product_other_machines(machine):
    rng = random.Random(4)
    x, y = rng.getrandbits(900), -rng.getrandbits(900)
    assert multiply_chunked(x, y, 128, 900, machine, max_ratio=None) == x * y


def test_chunk_ratio_is_enforced():
    with pytest.raises(ValueError):
        multiply_chunked(1, 1, 10, 100)
    with pytest.raises(ValueError):
        multiply_chunked(1 << 50, 1, 10, 40)


def test_gaussian_multiply_uses_four_products():
    ledger = CostLedger()
    x, y = GaussianInt(12345, -678), GaussianInt(-91011, 1213)
    w = gaussian_multiply(x, y, 8, ledger=ledger)
    z = complex(*x) * complex(*y)
    assert w == (int(z.real), int(z.imag))
    assert ledger.counters["gaussian_products"] == 1
    assert ledger.counters["chunked_products"] == 4
    k = -(-17 // 8)
    assert ledger.total_calls == 4 * k * k


def test_ledger_merge_is_componentwise_sum():
    a, b = CostLedger(), CostLedger()
    a.record_calls(64, 3)
    a.move(10)
    a.count("x")
    b.record_calls(64, 2)
    b.record_calls(100, 1)
    b.count("x", 4)
    a.record_level(1, 8, 8, 1, 4, 64, "one_step")
    b.record_level(1, 8, 8, 1, 4, 64, "one_step")
    m = a.merge(b)
    assert m.call_histogram == {64: 5, 128: 1}
    assert m.total_operand_bits == a.total_operand_bits + b.total_operand_bits
    assert m.bits_moved == 10
    assert m.counters["x"] == 5
    assert m.levels[1].calls == 2


def test_mcost_plus_is_monotone():
    ledger = CostLedger()
    for m, c in [(8, 5), (64, 7), (1024, 2)]:
        ledger.record_calls(m, c)
    values = [ledger.mcost_plus(m) for m in (8, 16, 64, 512, 1024, 4096)]
    assert values == sorted(values)
