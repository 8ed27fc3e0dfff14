"""Marker constants, regime classification, the hop and cross-over checks on
the orbit of 1/beta, and certified membership in the set M.

The markers are roots in (1, 2) of three polynomial families::

    alpha_k : x^(k+1) - 2x^k + x - 1
    gamma_k : x^(k+1) - x^k - ... - x - 1        (multinacci numbers)
    eta_k   : 2x^(k+1) - 4x^k + 1

They interleave as alpha_k <= gamma_k <= eta_k < alpha_(k+1), which splits
(golden, 2) into the regimes returned by :func:`classify_beta`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

from .dynamics import (BetaCtx, OrbitStop, Region, apply_digit,
                       classify_point, reflect)
from .errors import KMaxExceeded, UnresolvableAtPrecision
from .numeric import CertReal, isolate_root

DEFAULT_K_MAX = 64
DEFAULT_MEMBERSHIP_DEPTH = 5000


class MarkerKind(enum.Enum):
    ALPHA = "alpha"
    GAMMA = "gamma"
    ETA = "eta"

    def coefficients(self, k: int) -> list[int]:
        """Polynomial coefficients, constant term first."""
        if k < 1:
            raise ValueError("marker index k must be >= 1")
        c = [0] * (k + 2)
        if self is MarkerKind.ALPHA:
            c[k + 1], c[0] = 1, -1
            c[k] -= 2
            c[1] += 1
        elif self is MarkerKind.GAMMA:
            c = [-1] * (k + 1) + [1]
        else:
            c[k + 1], c[k], c[0] = 2, -4, 1
        return c


_MARKERS: dict[tuple[MarkerKind, int], CertReal] = {}


def marker(kind: MarkerKind | str, k: int, bits: int = 64) -> CertReal:
    """The unique root of the ``kind`` polynomial with index ``k`` in (1, 2)."""
    kind = MarkerKind(kind)
    key = (kind, k)
    if key not in _MARKERS:
        _MARKERS[key] = CertReal.of(isolate_root(kind.coefficients(k), (1, 2), bits))
    value = _MARKERS[key]
    value.enclosure(bits)
    return value


def multinacci(k: int) -> CertReal:
    """Root in (1, 2) of x^(k+1) = x^k + ... + 1; k = 1 is the golden ratio."""
    return marker(MarkerKind.GAMMA, k)


# --------------------------------------------------------------------------
# Regimes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Regime:
    """``tag`` is one of BelowOrAtGolden, ThmFree, ThmExists, Gap.

    For the last three, ``alpha_k < beta <= alpha_(k+1)``:
    ThmFree covers (alpha_k, gamma_k], ThmExists (gamma_k, eta_k] and
    Gap (eta_k, alpha_(k+1)].
    """

    tag: str
    k: int | None = None

    def __str__(self):
        return self.tag if self.k is None else f"{self.tag}({self.k})"


def classify_beta(beta, k_max: int = DEFAULT_K_MAX) -> Regime:
    beta = CertReal.of(beta)
    if not (beta > 1 and beta < 2):
        raise ValueError(f"beta must lie in (1, 2), got {beta!r}")
    if beta <= marker(MarkerKind.GAMMA, 1):
        return Regime("BelowOrAtGolden")
    for k in range(1, k_max + 1):
        if beta > marker(MarkerKind.ALPHA, k + 1):
            continue
        # gamma_1 = alpha_1, so ThmFree(1) is empty
        if k >= 2 and beta <= marker(MarkerKind.GAMMA, k):
            return Regime("ThmFree", k)
        if beta <= marker(MarkerKind.ETA, k):
            return Regime("ThmExists", k)
        return Regime("Gap", k)
    raise KMaxExceeded(f"beta exceeds alpha_{k_max + 1}; raise k_max")


# --------------------------------------------------------------------------
# Orbit conditions
# --------------------------------------------------------------------------


class HopCheck(NamedTuple):
    jump: bool
    closure: bool


def _t1_power(ctx: BetaCtx, x: CertReal, n: int) -> CertReal:
    for _ in range(n):
        x = apply_digit(ctx, 1, x)
    return x


def _t0_power(ctx: BetaCtx, x: CertReal, n: int) -> CertReal:
    for _ in range(n):
        x = apply_digit(ctx, 0, x)
    return x


def check_hop(ctx: BetaCtx, k: int) -> HopCheck:
    """``jump``: T1^(k-1) T0 (1/beta) lies right of S.
    ``closure``: T1^k T0 (1/beta) <= 1/beta.

    Equivalently jump <=> beta > alpha_k and closure <=> beta <= gamma_k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    x = _t1_power(ctx, apply_digit(ctx, 0, ctx.switch_lo), k - 1)
    jump = x.compare(ctx.switch_hi) > 0
    closure = apply_digit(ctx, 1, x).compare(ctx.switch_lo) <= 0
    return HopCheck(jump, closure)


def hop_index(ctx: BetaCtx) -> int:
    """The k with T1^(k-1) T0 (1/beta) > 1/(beta(beta-1)) >= T1^k T0 (1/beta).

    This is the number of forced T1 steps the orbit of 1 = T0(1/beta) takes
    before it stops lying right of S; it equals k when alpha_k < beta <= alpha_(k+1).
    Returns 0 when 1 itself is not right of S (beta <= golden).
    """
    x = apply_digit(ctx, 0, ctx.switch_lo)
    k = 0
    while x.compare(ctx.switch_hi) > 0:
        x = apply_digit(ctx, 1, x)
        k += 1
    return k


def check_crossover(ctx: BetaCtx, k: int) -> bool:
    """T1^k T0 (1/beta) in (1/beta, mid] and T0^k T1 (hi) in [mid, hi)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    lo, mid, hi = ctx.switch_lo, ctx.switch_mid, ctx.switch_hi
    x = _t1_power(ctx, apply_digit(ctx, 0, lo), k)
    y = _t0_power(ctx, apply_digit(ctx, 1, hi), k)
    left_ok = x.compare(lo) > 0 and x.compare(mid) <= 0
    right_ok = y.compare(mid) >= 0 and y.compare(hi) < 0
    return left_ok and right_ok


# --------------------------------------------------------------------------
# Membership in M
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MVerdict:
    """Outcome of following the forced orbit of 1 = T0(1/beta).

    ``tag`` is Member, NonMember or Unknown.  Members carry ``witness``
    BoundaryHit (the orbit lands exactly on an endpoint of S, a finite
    certificate) or UnivoquePersists (no interior hit within ``depth`` steps,
    which is evidence rather than proof).  ``word`` lists the forced digits
    applied to 1; ``depth`` is its length.
    """

    tag: str
    depth: int
    word: tuple[int, ...] = ()
    witness: str | None = None

    @property
    def certified(self) -> bool:
        return self.tag == "NonMember" or self.witness == "BoundaryHit"


def _walk(ctx: BetaCtx, x: CertReal, max_steps: int):
    word: list[int] = []
    while True:
        try:
            region = classify_point(ctx, x)
        except UnresolvableAtPrecision:
            return None, tuple(word)
        if region.in_switch:
            return region, tuple(word)
        if len(word) == max_steps:
            return OrbitStop.STEP_CAP, tuple(word)
        d = 0 if region is Region.LEFT_OF_S else 1
        x = apply_digit(ctx, d, x)
        word.append(d)


_MIRROR = {Region.BOUNDARY_LO: Region.BOUNDARY_HI, Region.BOUNDARY_HI: Region.BOUNDARY_LO}


def m_membership(ctx: BetaCtx, max_steps: int = DEFAULT_MEMBERSHIP_DEPTH) -> MVerdict:
    one = apply_digit(ctx, 0, ctx.switch_lo)
    stop, word = _walk(ctx, one, max_steps)
    mstop, mword = _walk(ctx, reflect(ctx, one), max_steps)
    if stop is not None and mstop is not None:
        if _MIRROR.get(stop, stop) is not mstop or mword != tuple(1 - d for d in word):
            raise RuntimeError("orbit of 1 and its reflection disagree")
    if stop is None:
        return MVerdict("Unknown", len(word), word)
    if stop is Region.INTERIOR_S:
        return MVerdict("NonMember", len(word), word)
    if stop is OrbitStop.STEP_CAP:
        return MVerdict("Member", len(word), word, "UnivoquePersists")
    return MVerdict("Member", len(word), word, "BoundaryHit")
