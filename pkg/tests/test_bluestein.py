import random

import mpmath
import pytest

from multranspose.bluestein import (FORWARD, INVERSE, DftRequest, bluestein_dft,
                                    bluestein_dft_slices, reshape_for_slices)
from multranspose.machines import SCHOOLBOOK, CostLedger
from multranspose.numerics import FixedArray, round_toward_zero
from multranspose.oracles import dft_slices, error_ulps, max_error_ulps, naive_dft, to_mpc

from conftest import random_disc_point


def _random_vector(rng, n, p):
    return [round_toward_zero(random_disc_point(rng), p) for _ in range(n)]


def test_delta_gives_constant():
    p, n = 20, 5
    X = [(1 << p, 0)] + [(0, 0)] * (n - 1)
    Y = bluestein_dft(X, DftRequest(n, p, n * p))
    with mpmath.workprec(p + 64):
        for y in Y:
            assert error_ulps(y, mpmath.mpf(1) / n, p) < 12 * n * n


@pytest.mark.parametrize("n", [2, 3, 4, 7, 12])
@pytest.mark.parametrize("direction,sign", [(FORWARD, -1), (INVERSE, 1)])
def test_matches_naive_dft(n, direction, sign):
    p = 24
    rng = random.Random(n)
    X = _random_vector(rng, n, p)
    Y = bluestein_dft(X, DftRequest(n, p, n * p, direction))
    with mpmath.workprec(p + 64):
        ref = naive_dft([to_mpc(x, p) for x in X], sign)
        assert max_error_ulps(Y, ref, p) < 12 * n * n


def test_n_equal_one_is_identity():
    X = [(123, -45)]
    assert bluestein_dft(X, DftRequest(1, 8, 8)) == X


def test_slices_match_reference_and_use_one_product():
    p, shape = 18, (2, 6, 3)
    rng = random.Random(9)
    pts = _random_vector(rng, 36, p)
    arr = FixedArray.from_points(pts, shape)
    ledger = CostLedger()
    out = bluestein_dft_slices(arr, DftRequest(6, p, 36 * p), ledger=ledger)
    assert ledger.counters["gaussian_products"] == 1
    with mpmath.workprec(p + 64):
        ref = dft_slices([to_mpc(z, p) for z in pts], shape, -1)
        assert max_error_ulps(out, ref, p) < 12 * 36


def test_other_machine_same_result():
    p, n = 16, 9
    X = _random_vector(random.Random(1), n, p)
    req = DftRequest(n, p, n * p)
    assert bluestein_dft(X, req, SCHOOLBOOK) == bluestein_dft(X, req)


def test_trace_exposes_stages():
    trace = {}
    bluestein_dft(_random_vector(random.Random(2), 5, 12), DftRequest(5, 12, 60), trace=trace)
    assert {"zeta", "gammas", "omegas", "B", "X_prime", "Y_prime", "Y"} <= set(trace)
    assert len(trace["B"]) == 9


def test_request_validation():
    with pytest.raises(ValueError):
        DftRequest(4, 8, 31).validate()
    with pytest.raises(ValueError):
        DftRequest(4, 8, 32, "sideways")


def test_reshape_for_slices():
    arr = FixedArray.zeros((2, 3, 4, 5))
    assert reshape_for_slices(arr, 2).shape == (6, 4, 5)
    assert reshape_for_slices(arr, 0).shape == (1, 2, 60)
    with pytest.raises(ValueError):
        reshape_for_slices(arr, 4)
