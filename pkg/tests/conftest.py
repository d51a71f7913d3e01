import random
from fractions import Fraction

import mpmath
import pytest


def random_disc_point(rng: random.Random, bits: int = 96):
    """Exact random point of the closed unit disc with dyadic coordinates."""
    scale = 1 << bits
    while True:
        x = rng.randrange(-scale, scale + 1)
        y = rng.randrange(-scale, scale + 1)
        if x * x + y * y <= scale * scale:
            return Fraction(x, scale), Fraction(y, scale)


def mpc_of(z):
    return mpmath.mpc(mpmath.mpf(z[0].numerator) / z[0].denominator,
                      mpmath.mpf(z[1].numerator) / z[1].denominator)


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
