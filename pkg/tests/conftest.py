from fractions import Fraction

import mpmath
import pytest
from hypothesis import settings

from betaswitch import BetaCtx, multinacci

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

mpmath.mp.dps = 60

# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])


@pytest.fixture(scope="session")
def golden():
    return BetaCtx.of(multinacci(1))


@pytest.fixture(scope="session")
def tribonacci():
    return BetaCtx.of(multinacci(2))


def mp_root(coeffs, lo=1, hi=2):
    """Independent oracle: the real root in (lo, hi) via mpmath.polyroots."""
    roots = mpmath.polyroots(list(reversed(coeffs)), maxsteps=200, extraprec=200)
    real = [r.real for r in roots if abs(r.imag) < mpmath.mpf(10) ** -40 and lo < r.real < hi]
    assert len(real) == 1
    return real[0]


def as_mpf(x):
    """Midpoint of a tight enclosure, as an mpf."""
    enc = x.enclosure(200)
    m = enc.mid
    return mpmath.mpf(m.numerator) / m.denominator


def frac(s: str) -> Fraction:
    return Fraction(s)


class _Recorder:
    """Context manager that stores one PASS/FAIL line for a criterion."""

    def __init__(self, number: int, text: str):
        self.number, self.text = number, text

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            ACCEPTANCE[self.number] = f"[PASS] {self.number:>2}. {self.text}"
        else:
            reason = str(exc).splitlines()[0] if str(exc) else exc_type.__name__
            ACCEPTANCE[self.number] = f"[FAIL] {self.number:>2}. {self.text}: {reason}"
        return False


@pytest.fixture
def criterion():
    return _Recorder
