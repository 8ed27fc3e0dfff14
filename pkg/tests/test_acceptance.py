"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints.
"""

import csv
import io
import json
import random
import time
from fractions import Fraction

import mpmath
import pytest

from betaswitch import (BetaCtx, MarkerKind, OmegaSource, apply_digit, birkhoff_average,
                        certify_impossible_constant, check_hop, enumerate_branches,
                        glst_verify, luroth_classic, m_membership, marker, multinacci,
                        realize_exists_omega, realize_fixed_omega, reflect, return_sequence)
from betaswitch.classify import hop_index
from betaswitch.cli import run
from betaswitch.glst import reflect_branch
from betaswitch.return_map import switch_region

from conftest import as_mpf

# printed table of marker values (4 decimals)
PRINTED_MARKERS = {
    1: ("1.6180", "1.6180", "1.7071"),
    2: ("1.7549", "1.8393", "1.8546"),
    3: ("1.8668", "1.9276", "1.9305"),
    4: ("1.9332", "1.9660", "1.9666"),
    5: ("1.9672", "1.9836", "1.9837"),
}
# the one printed cell that is not the correctly rounded value
MISPRINTED = {(4, 1)}


def _cli(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def _marker_rows():
    start = time.perf_counter()
    code, text = _cli("markers", "5")
    elapsed = time.perf_counter() - start
    assert code == 0
    rows = {int(r["k"]): r for r in csv.DictReader(io.StringIO(text))}
    # round the 12-digit output exactly, not through floats
    table = {k: tuple(_round4(rows[k][c]) for c in ("alpha", "gamma", "eta")) for k in rows}
    return table, elapsed


def _round4(s: str) -> str:
    q = Fraction(s)
    n = round(q * 10_000)
    return f"{n // 10_000}.{n % 10_000:04d}"


@pytest.mark.xfail(strict=True, reason="printed gamma_4 = 1.9660 is not the correctly rounded "
                                       "value 1.96594824 -> 1.9659")
def test_criterion_01_marker_table(criterion):
    with criterion(1, "markers 5 reproduces the printed table to 4 decimals in < 1 s"):
        table, elapsed = _marker_rows()
        assert elapsed < 1.0, f"took {elapsed:.2f} s"
        bad = [(k, i, table[k][i], PRINTED_MARKERS[k][i])
               for k in PRINTED_MARKERS for i in range(3) if table[k][i] != PRINTED_MARKERS[k][i]]
        assert not bad, "mismatches (k, column, computed, printed): " + ", ".join(map(str, bad))


def test_criterion_01_other_cells():
    table, elapsed = _marker_rows()
    assert elapsed < 1.0
    for k, printed in PRINTED_MARKERS.items():
        for i in range(3):
            if (k, i) not in MISPRINTED:
                assert table[k][i] == printed[i], (k, i)
    # the mismatched cell is a rounding slip in the printed table, not a wrong root
    g4 = as_mpf(marker(MarkerKind.GAMMA, 4))
    assert abs(g4 - mpmath.mpf("1.9660")) > mpmath.mpf("5e-5")
    assert table[4][1] == "1.9659"


def test_criterion_02_golden_branch_formulas(golden, criterion):
    with criterion(2, "golden branch endpoints match the geometric closed forms; "
                      "digit-1 branches are the reflections"):
        b = as_mpf(golden.beta)
        branches = {br.return_time: br for br in enumerate_branches(golden, 0, 12)}
        tol = mpmath.mpf(2) ** -40
        for i in range(2, 13):
            br = branches[i]
            lo = sum(b ** -n for n in range(2, i + 2))
            hi = sum(b ** -n for n in range(2, i + 3))
            assert abs(as_mpf(br.domain.lo) - lo) < tol
            assert abs(as_mpf(br.domain.hi) - hi) < tol
            assert br.domain.lo.enclosure(42).width <= Fraction(1, 2 ** 40)
            assert not br.domain.lo_closed and br.domain.hi_closed
        ones = {br.return_time: br for br in enumerate_branches(golden, 1, 12)}
        for i in range(2, 13):
            mirrored = reflect_branch(golden, branches[i])
            assert ones[i].domain.key == mirrored.domain.key
            assert ones[i].domain.lo_closed == mirrored.domain.lo_closed
            assert ones[i].domain.hi_closed == mirrored.domain.hi_closed
            assert ones[i].word == mirrored.word


def test_criterion_03_expected_return_time(golden, criterion):
    with criterion(3, "golden expected return time 2b^2-b with certified tail < 1e-6; "
                      "Birkhoff average within 0.05; < 10 s"):
        start = time.perf_counter()
        code, text = _cli("ergodic", "--beta", "golden", "--digit", "0", "--depth", "40")
        assert code == 0
        res = json.loads(text)["results"]
        b = (1 + mpmath.sqrt(5)) / 2
        target = 2 * b ** 2 - b
        assert res["certified"] is True
        assert mpmath.mpf(res["tail_bound"]) < mpmath.mpf("1e-6")
        assert abs(mpmath.mpf(res["exact"]) - target) < mpmath.mpf("1e-11")
        assert mpmath.mpf(res["value"]) <= target
        assert target - mpmath.mpf(res["value"]) <= mpmath.mpf(res["tail_bound"]) + mpmath.mpf("1e-11")
        x0 = Fraction(mpmath.nstr(mpmath.sqrt(2) - mpmath.mpf("0.7"), 30))
        avg = birkhoff_average(golden, 0, x0, 10 ** 5)
        assert abs(float(avg) - float(target)) < 0.05
        elapsed = time.perf_counter() - start
        assert elapsed < 10, f"took {elapsed:.1f} s"


def test_criterion_04_hop_cross_validation(criterion):
    with criterion(4, "hop orbit conditions agree with marker comparisons "
                      "(200 betas, k <= 8)"):
        rng = random.Random(20240401)
        disagreements = []
        for _ in range(200):
            beta = Fraction(rng.randint(162_000, 199_000), 100_000)
            ctx = BetaCtx.of(beta)
            for k in range(1, 9):
                hop = check_hop(ctx, k)
                by_root = (marker(MarkerKind.ALPHA, k).compare(beta) < 0,
                           marker(MarkerKind.GAMMA, k).compare(beta) >= 0)
                if (hop.jump, hop.closure) != by_root:
                    disagreements.append((beta, k))
        assert not disagreements, disagreements[:5]


def test_criterion_05_free_return_times(criterion):
    with criterion(5, "beta = 1.8: 100 random (omega, times) prefixes of length 8 "
                      "are realizable and witnesses replay"):
        ctx = BetaCtx.of(Fraction(9, 5))
        rng = random.Random(5)
        for _ in range(100):
            omega = tuple(rng.randint(0, 1) for _ in range(8))
            times = tuple(rng.randint(3, 10) for _ in range(8))
            tree = realize_fixed_omega(ctx, omega, times)
            assert tree.nonempty, (omega, times)
            x, prefix = tree.witness()
            assert prefix == omega
            recs = return_sequence(ctx, OmegaSource.fixed(omega), x, 8)
            assert tuple(r.time for r in recs) == times


# found by the propagation itself; kept as a regression value
IMPOSSIBLE_DEPTH_186 = 2


def test_criterion_06_constant_sequence_impossible(criterion):
    with criterion(6, "beta = 1.86: constant return time k+1 under omega = 0^inf "
                      f"is impossible at depth {IMPOSSIBLE_DEPTH_186}"):
        ctx = BetaCtx.of(Fraction(186, 100))
        k = hop_index(ctx)
        assert k == 2
        verdict = certify_impossible_constant(ctx, k + 1, 0)
        assert verdict.impossible
        assert verdict.depth == IMPOSSIBLE_DEPTH_186


def test_criterion_07_exists_omega_gap(criterion):
    with criterion(7, "beta = 1.754: times (2,3) unrealizable for every omega, "
                      "(2,j) realizable for some other j"):
        ctx = BetaCtx.of(Fraction(1754, 1000))
        assert not realize_exists_omega(ctx, (2, 3)).nonempty
        others = [j for j in range(2, 12) if j != 3 and realize_exists_omega(ctx, (2, j)).nonempty]
        assert others


def _dichotomy_case(ctx, depth=40):
    mv = m_membership(ctx, max_steps=depth)
    if mv.tag == "NonMember":
        at = glst_verify(ctx, 0, mv.depth + 1)
        ok = at.verdict == "NotGLST" and at.incomplete_witness.return_time == mv.depth + 1
        if mv.depth >= 1:
            ok = ok and glst_verify(ctx, 0, mv.depth).verdict != "NotGLST"
        return ok, mv
    report = glst_verify(ctx, 0, min(depth, 14) + 1)
    return report.verdict != "NotGLST", mv


def test_criterion_08_dichotomy(criterion):
    with criterion(8, "glst_verify agrees with orbit membership on named and 50 random "
                      "betas; exact certificates for multinacci"):
        named = [multinacci(1)] + [multinacci(k) for k in range(2, 7)]
        named += [Fraction(s) for s in ("1.754", "1.8", "1.86", "1.93", "1.95")]
        rng = random.Random(8)
        rand = [Fraction(rng.randint(1_001, 99_999), 100_000) + 1 for _ in range(50)]
        for beta in named + rand:
            ctx = BetaCtx.of(beta)
            ok, _ = _dichotomy_case(ctx)
            assert ok, beta
        for k in range(2, 7):
            ctx = BetaCtx.of(multinacci(k))
            mv = m_membership(ctx)
            assert mv.tag == "Member" and mv.witness == "BoundaryHit" and mv.certified
            assert mv.word == (1,) * k
            assert glst_verify(ctx, 0, k + 4).verdict == "GLST"
            assert glst_verify(ctx, 1, k + 4).verdict == "GLST"


def test_criterion_09_reflection_symmetry(golden, tribonacci, criterion):
    with criterion(9, "T1 R = R T0, R(S) = S and complemented branch duality hold exactly "
                      "(golden, tribonacci)"):
        for ctx in (golden, tribonacci):
            s = switch_region(ctx)
            assert reflect(ctx, s.lo).same_as(s.hi) and reflect(ctx, s.hi).same_as(s.lo)
            b = ctx.beta
            points = [ctx.switch_lo, ctx.switch_mid, ctx.switch_hi, 1 / (b * b), b - 1,
                      (b + 1) / 4]
            for x in points:
                assert x.is_exact
                lhs = apply_digit(ctx, 1, reflect(ctx, x))
                rhs = reflect(ctx, apply_digit(ctx, 0, x))
                assert lhs.same_as(rhs)
            zeros = enumerate_branches(ctx, 0, 10)
            ones = enumerate_branches(ctx, 1, 10)
            mirrored = {(br.word.digits, br.domain.key, br.domain.lo_closed, br.domain.hi_closed)
                        for br in (reflect_branch(ctx, z) for z in zeros)}
            actual = {(br.word.digits, br.domain.key, br.domain.lo_closed, br.domain.hi_closed)
                      for br in ones}
            assert mirrored == actual


def test_criterion_10_luroth(criterion):
    with criterion(10, "classic Lüroth: 30-digit reconstruction error < 2^-30 "
                       "for 100 random rationals"):
        rng = random.Random(10)
        for _ in range(100):
            q = rng.randint(2, 10 ** 9)
            x = Fraction(rng.randint(1, q), q)
            exp = luroth_classic(x, 30)
            assert all(a >= 2 for a in exp.digits)
            # series value built independently of the library
            acc, weight = Fraction(0), Fraction(1)
            for a in exp.digits:
                acc += weight / a
                weight /= a * (a - 1)
            assert acc == exp.value()
            assert abs(x - acc) < Fraction(1, 2 ** 30)
