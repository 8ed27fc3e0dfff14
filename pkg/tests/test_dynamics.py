from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from betaswitch import (BetaCtx, OmegaSource, OutOfDomain, Region, apply_digit, classify_point,
                        forced_orbit, greedy_step, kbeta_step, lazy_step, reflect)
from betaswitch.dynamics import OrbitStop, greedy_digits

from conftest import as_mpf

betas = st.fractions(min_value=Fraction(101, 100), max_value=Fraction(199, 100),
                     max_denominator=1000)
units = st.fractions(min_value=0, max_value=1, max_denominator=10_000)


def test_ctx_rejects_out_of_range():
    for bad in (1, 2, Fraction(1, 2), 3):
        with pytest.raises(ValueError):
            BetaCtx.of(bad)


def test_switch_region_golden(golden):
    # for the golden ratio S = [1/beta, 1]
    assert golden.switch_hi.same_as(1)
    assert abs(as_mpf(golden.switch_lo) - 2 / (1 + mpmath.sqrt(5))) < mpmath.mpf(10) ** -50


def test_apply_digit(golden):
    assert apply_digit(golden, 0, 0).exact == 0
    assert apply_digit(golden, 1, golden.right_end).same_as(golden.right_end)
    assert apply_digit(golden, 0, golden.switch_lo).same_as(1)
    with pytest.raises(OutOfDomain):
        apply_digit(golden, 1, Fraction(1, 10), check=True)
    with pytest.raises(ValueError):
        apply_digit(golden, 2, 0)


def test_classify_point(golden):
    assert classify_point(golden, Fraction(7, 10)) is Region.INTERIOR_S
    assert classify_point(golden, golden.switch_lo) is Region.BOUNDARY_LO
    assert classify_point(golden, 1) is Region.BOUNDARY_HI
    assert classify_point(golden, Fraction(-1, 10)) is Region.OUTSIDE
    assert classify_point(BetaCtx.of(Fraction(9, 5)), Fraction(1, 2)) is Region.LEFT_OF_S


def test_kbeta_step(golden):
    y, used = kbeta_step(golden, OmegaSource.ones(), 0, Fraction(3, 10))
    assert not used and y.same_as(golden.beta * Fraction(3, 10))
    assert abs(float(y) - 0.485410196) < 1e-9
    y, used = kbeta_step(golden, OmegaSource.ones(), 0, Fraction(7, 10))
    assert used and y.same_as(golden.beta * Fraction(7, 10) - 1)
    y, used = kbeta_step(golden, OmegaSource.zeros(), 0, golden.switch_lo)
    assert used and y.same_as(1)
    with pytest.raises(OutOfDomain):
        kbeta_step(golden, OmegaSource.zeros(), 0, Fraction(5))


def test_greedy_and_lazy(golden):
    # 1/beta is the first point where the greedy rule takes T1
    assert greedy_step(golden, golden.switch_lo).exact == 0
    assert greedy_step(golden, 1 / golden.beta ** 2).same_as(1 / golden.beta)
    assert greedy_step(golden, 1).same_as(golden.beta - 1)
    assert lazy_step(golden, golden.switch_lo).same_as(1)
    assert greedy_step(BetaCtx.of(Fraction(3, 2)), 0).exact == 0


def test_reflect(golden):
    assert reflect(golden, golden.switch_lo).same_as(golden.switch_hi)
    assert reflect(golden, golden.switch_mid).same_as(golden.switch_mid)
    x = Fraction(3, 7)
    assert reflect(golden, reflect(golden, x)).same_as(x)


def test_forced_orbit(tribonacci):
    orb = forced_orbit(tribonacci, 1)
    assert orb.stop is OrbitStop.HIT_BOUNDARY_LO
    assert orb.word == (1, 1)
    assert orb.trajectory[-1].same_as(tribonacci.switch_lo)
    ctx = BetaCtx.of(Fraction(9, 5))
    orb = forced_orbit(ctx, 1)
    assert orb.stop is OrbitStop.HIT_INTERIOR and orb.steps <= 12
    assert forced_orbit(ctx, 0, max_steps=50).stop is OrbitStop.STEP_CAP


def test_omega_sources():
    assert OmegaSource.fixed([1, 0]).digits(4) == (1, 0, 0, 0)
    assert OmegaSource.fixed([1], tail=1).digits(3) == (1, 1, 1)
    assert OmegaSource.periodic([0, 1]).digits(5) == (0, 1, 0, 1, 0)
    s = OmegaSource.stream(iter([1, 1, 0]))
    assert s.digit(2) == 0 and s.digit(0) == 1
    with pytest.raises(ValueError):
        OmegaSource.fixed([2])
    with pytest.raises(ValueError):
        OmegaSource.periodic([])


def _greedy_oracle(beta: Fraction, x: Fraction, n: int) -> list[int]:
    out = []
    for _ in range(n):
        d = 1 if x * beta >= 1 else 0
        out.append(d)
        x = beta * x - d
    return out


@given(betas, units)
def test_greedy_digits_match_oracle(beta, u):
    ctx = BetaCtx.of(beta)
    x = u / (beta - 1)
    assert greedy_digits(ctx, x, 12) == _greedy_oracle(beta, x, 12)


@given(betas, units, st.lists(st.integers(0, 1), min_size=1, max_size=20))
def test_random_orbit_stays_in_domain_and_expands(beta, u, omega):
    ctx = BetaCtx.of(beta)
    x0 = u / (beta - 1)
    x, idx, digits = ctx.right_end * u, 0, []
    src = OmegaSource.fixed(omega)
    for _ in range(20):
        y, used = kbeta_step(ctx, src, idx, x)
        digits.append((y - ctx.beta * x).exact * -1)
        idx += used
        x = y
        assert x.exact >= 0 and x.exact <= ctx.right_end.exact
    # x0 = sum d_i beta^-i + beta^-n x_n
    total = sum(Fraction(d) / beta ** (i + 1) for i, d in enumerate(digits))
    assert total + x.exact / beta ** len(digits) == x0


@given(betas, units, st.integers(0, 1))
def test_reflection_conjugates_digits(beta, u, d):
    ctx = BetaCtx.of(beta)
    x = ctx.right_end * u
    lhs = apply_digit(ctx, 1 - d, reflect(ctx, x))
    rhs = reflect(ctx, apply_digit(ctx, d, x))
    assert lhs.exact == rhs.exact


@given(betas, units)
def test_reflection_swaps_regions(beta, u):
    ctx = BetaCtx.of(beta)
    x = ctx.right_end * u
    swap = {Region.LEFT_OF_S: Region.RIGHT_OF_S, Region.RIGHT_OF_S: Region.LEFT_OF_S,
            Region.BOUNDARY_LO: Region.BOUNDARY_HI, Region.BOUNDARY_HI: Region.BOUNDARY_LO,
            Region.INTERIOR_S: Region.INTERIOR_S}
    assert classify_point(ctx, reflect(ctx, x)) is swap[classify_point(ctx, x)]
