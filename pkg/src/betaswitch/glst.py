"""Generalized Lüroth series transformations (GLSTs).

A GLST on [a, b] has countably many disjoint branch intervals whose lengths
add up to b - a, and on each of them it is the increasing affine bijection
onto [a, b].  This module checks that property for the fixed-omega return
maps U_{beta,0} and U_{beta,1}, computes their expected return time, and
implements the classic Lüroth map on (0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .classify import m_membership
from .dynamics import BetaCtx, OmegaSource, reflect
from .errors import NoReturnWithinCap, NotAGlst
from .numeric import CertReal, NumberFieldElem
from .return_map import (DEFAULT_RETURN_CAP, Branch, Itv, first_return,
                         iter_returns, piece_branch, split_against_switch, switch_region)

DEFAULT_TOWER_STATES = 4096


# --------------------------------------------------------------------------
# Branch reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchClass:
    """Branches with equal return time and equal image, represented by the
    leftmost one; ``count`` of them exist."""

    branch: Branch
    count: int

    @property
    def total_length(self) -> CertReal:
        return self.branch.domain.length * self.count


@dataclass(frozen=True)
class GlstReport:
    """``verdict`` is NotGLST (an incomplete branch exists), ConsistentWithGLST
    (every branch up to ``depth`` is full) or GLST (consistent, and the orbit
    of 1 certifiably hits an endpoint of S, which settles the question)."""

    first_digit: int
    depth: int
    classes: list[BranchClass]
    all_full: bool
    incomplete_witness: Branch | None
    length_gap: CertReal
    verdict: str

    @property
    def branches(self) -> list[Branch]:
        return [c.branch for c in self.classes]

    @property
    def branch_count(self) -> int:
        return sum(c.count for c in self.classes)


def _classes(ctx: BetaCtx, first_digit: int, max_time: int) -> list[BranchClass]:
    key = ("classes", first_digit, max_time)
    if key not in ctx._cache:
        out = []
        for t, closing, _ in iter_returns(ctx, switch_region(ctx), first_digit, max_time,
                                          merge=True):
            for p in closing:
                if not p.image.is_point:
                    out.append(BranchClass(piece_branch(ctx, p, t), p.count))
        ctx._cache[key] = out
    return ctx._cache[key]


def glst_verify(ctx: BetaCtx, first_digit: int, max_time: int) -> GlstReport:
    """Inspect every branch of U_{beta,first_digit} with return time <= max_time.

    Degenerate (single point) branches carry no length and are ignored.
    """
    if first_digit not in (0, 1):
        raise ValueError("first_digit must be 0 or 1")
    if max_time < 1:
        raise ValueError("max_time must be >= 1")
    classes = _classes(ctx, first_digit, max_time)
    covered = CertReal(Fraction(0))
    witness = None
    for c in classes:
        covered = covered + c.total_length
        if witness is None and not c.branch.full:
            witness = c.branch
    gap = ctx.switch_width - covered
    if witness is not None:
        verdict = "NotGLST"
    else:
        mv = m_membership(ctx, max_steps=max_time)
        verdict = "GLST" if mv.witness == "BoundaryHit" else "ConsistentWithGLST"
    return GlstReport(first_digit, max_time, classes, witness is None, witness, gap, verdict)


def reflect_branch(ctx: BetaCtx, b: Branch) -> Branch:
    """Mirror image of a branch under x -> 1/(beta-1) - x."""
    def mirror(itv: Itv) -> Itv:
        return Itv(reflect(ctx, itv.hi), reflect(ctx, itv.lo), itv.hi_closed, itv.lo_closed)
    return Branch(b.word.complement(), mirror(b.domain), b.return_time, mirror(b.image), b.full)


# --------------------------------------------------------------------------
# Expected return time
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReturnTimeEstimate:
    """``value`` sums t * P(return time = t) over t <= depth; ``tail_bound``
    bounds the remaining part.  When ``exact`` is set the tail bound is
    ``exact - value`` and certified."""

    value: CertReal
    tail_bound: CertReal
    exact: CertReal | None
    certified: bool


def _solve(matrix: list[list[CertReal]], rhs: list[CertReal]) -> list[CertReal]:
    """Gaussian elimination over exact CertReals."""
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col].sign() != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col].sign() != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def _tower(ctx: BetaCtx, first_digit: int, max_states: int) -> CertReal | None:
    """Exact mean return time over S via the finite tower of image states.

    A state is an image interval outside S together with its forced digit.
    A uniform point on state J moves to the part J' of its image with
    probability |J'| / (beta |J|); the mean remaining time tau solves
    tau(J) = 1 + sum f(J -> J') tau(J').  Returns None when the states do not
    close up within ``max_states``.
    """
    if not ctx.beta.is_exact:
        return None

    def successors(itv: Itv, digit: int):
        image = itv.map_affine(ctx.beta, CertReal(Fraction(digit)))
        left, _, right = split_against_switch(ctx, image)
        return [(p, side) for p, side in ((left, 0), (right, 1))
                if p is not None and not p.is_point]

    index: dict = {}
    states: list[tuple[Itv, int]] = []
    edges: list[list[tuple[int, CertReal]]] = []

    def visit(itv: Itv, side: int) -> int:
        key = (itv.key, side)
        if key not in index:
            index[key] = len(states)
            states.append((itv, side))
            edges.append([])
        return index[key]

    start = switch_region(ctx)
    start_edges = [(visit(p, s), p.length / (ctx.beta * start.length))
                   for p, s in successors(start, first_digit)]
    done = 0
    while done < len(states):
        if len(states) > max_states:
            return None
        itv, side = states[done]
        edges[done] = [(visit(p, s), p.length / (ctx.beta * itv.length))
                       for p, s in successors(itv, side)]
        done += 1
    n = len(states)
    zero, one = CertReal(Fraction(0)), CertReal(Fraction(1))
    matrix = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for i, row in enumerate(edges):
        for j, w in row:
            matrix[i][j] = matrix[i][j] - w
    tau = _solve(matrix, [one] * n) if n else []
    total = one
    for j, w in start_edges:
        total = total + w * tau[j]
    return total


def expected_return_time(ctx: BetaCtx, first_digit: int, max_time: int = 40,
                         max_states: int = DEFAULT_TOWER_STATES) -> ReturnTimeEstimate:
    """Mean of the first return time of U_{beta,first_digit} for a uniform
    point of S (the Birkhoff limit when the map is a GLST)."""
    report = glst_verify(ctx, first_digit, max_time)
    if report.incomplete_witness is not None:
        raise NotAGlst(f"incomplete branch {report.incomplete_witness.word} "
                       f"at time {report.incomplete_witness.return_time}")
    width = ctx.switch_width
    value = CertReal(Fraction(0))
    for c in report.classes:
        value = value + c.total_length * c.branch.return_time
    value = value / width
    exact = _tower(ctx, first_digit, max_states)
    if exact is not None:
        return ReturnTimeEstimate(value, exact - value, exact, True)
    # geometric extrapolation of the uncovered mass, not certified
    gap = report.length_gap / width
    tail = gap * (max_time + 1) * 2
    return ReturnTimeEstimate(value, tail, None, False)


# --------------------------------------------------------------------------
# Birkhoff averages
# --------------------------------------------------------------------------


def _exact_size(x: CertReal) -> int | None:
    ex = x.exact
    if isinstance(ex, Fraction):
        return max(ex.numerator.bit_length(), ex.denominator.bit_length())
    if isinstance(ex, NumberFieldElem):
        return max([abs(c).bit_length() for c in ex.nums] + [ex.den.bit_length()])
    return None


def _float_orbit(beta: float, first_digit: int, x: float, n: int, cap: int,
                 done: int) -> int:
    lo = 1.0 / beta
    hi = lo / (beta - 1.0)
    steps = 0
    for i in range(n):
        x = beta * x - first_digit
        t = 1
        while not (lo <= x <= hi):
            if t >= cap:
                raise NoReturnWithinCap(f"return {done + i + 1}: no return within {cap} steps",
                                        index=done + i, steps=cap)
            x = beta * x - (1 if x > hi else 0)
            t += 1
        steps += t
    return steps


def birkhoff_average(ctx: BetaCtx, first_digit: int, x0, n: int,
                     cap: int = DEFAULT_RETURN_CAP, exact_bits: int = 512,
                     exact_returns: int = 500) -> Fraction:
    """Mean of the first ``n`` return times along the U_{beta,first_digit} orbit of x0.

    The orbit is followed exactly for up to ``exact_returns`` returns while its
    representation stays below ``exact_bits``; an exact orbit that revisits a
    point is summed over its cycle.  Past either budget the orbit continues in floating point, which
    gives a pseudo-orbit with the right statistics rather than the true one.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    omega = OmegaSource.constant(first_digit)
    x = CertReal.of(x0)
    seen: dict = {}
    times: list[int] = []
    while len(times) < n:
        size = _exact_size(x)
        if size is None or size > exact_bits or len(times) >= exact_returns:
            break
        key = x.key
        if key in seen:
            start = seen[key]
            cycle = times[start:]
            rest = n - len(times)
            full, part = divmod(rest, len(cycle))
            total = sum(times) + full * sum(cycle) + sum(cycle[:part])
            return Fraction(total, n)
        seen[key] = len(times)
        try:
            rec = first_return(ctx, omega, 0, x, cap)
        except NoReturnWithinCap as exc:
            raise NoReturnWithinCap(f"return {len(times) + 1}: {exc}", index=len(times),
                                    steps=exc.steps) from None
        times.append(rec.time)
        x = rec.end
    total = sum(times)
    if len(times) < n:
        total += _float_orbit(float(ctx.beta), first_digit, float(x), n - len(times), cap,
                              len(times))
    return Fraction(total, n)


# --------------------------------------------------------------------------
# Classic Lüroth map
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LurothDigits:
    """Digits a_k >= 2 of x = 1/a_1 + 1/(a_1(a_1-1)a_2) + ...;
    ``terminated`` is set when the orbit reached 0."""

    digits: tuple[int, ...]
    terminated: bool = False

    def partial_sums(self) -> list[Fraction]:
        out, acc, weight = [], Fraction(0), Fraction(1)
        for a in self.digits:
            acc += weight / a
            weight /= a * (a - 1)
            out.append(acc)
        return out

    def value(self) -> Fraction:
        sums = self.partial_sums()
        return sums[-1] if sums else Fraction(0)


def luroth_step(x: Fraction) -> tuple[int, Fraction]:
    """``(a, T(x))`` with x in (1/a, 1/(a-1)] and T(x) = a(a-1)x - (a-1)."""
    n = int(1 / x)  # x in (1/(n+1), 1/n]  <=>  n = floor(1/x)
    return n + 1, n * (n + 1) * x - n


def luroth_classic(x, n: int) -> LurothDigits:
    x = Fraction(x)
    if not 0 < x <= 1:
        raise ValueError("x must lie in (0, 1]")
    digits = []
    for _ in range(n):
        if x == 0:
            return LurothDigits(tuple(digits), True)
        a, x = luroth_step(x)
        digits.append(a)
    return LurothDigits(tuple(digits), x == 0)
