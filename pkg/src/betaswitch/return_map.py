"""The first-return map to the switch region S.

Pointwise evaluation (:func:`first_return`, :func:`return_sequence`) follows
K_beta step by step.  Interval-level questions are answered by propagating
intervals: an image interval is pushed through T0/T1, split against S, and
every piece that lands in S closes a branch.  Pieces that share an image evolve
identically, so the propagation can optionally merge them into classes that
carry a multiplicity and a representative word (:func:`iter_returns` with
``merge=True``).  That keeps the work polynomial even though the number of
branches of a given return time grows exponentially in general.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .dynamics import BetaCtx, OmegaSource, Region, classify_point, kbeta_step
from .errors import NoReturnWithinCap
from .numeric import CertReal

DEFAULT_RETURN_CAP = 10_000


# --------------------------------------------------------------------------
# Words and intervals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MapWord:
    """A composition of T0/T1, digits in application order.

    As an affine map, ``word(x) = beta**n * x - sum(d_j * beta**(n-j))``.
    """

    digits: tuple[int, ...]

    def __post_init__(self):
        if any(d not in (0, 1) for d in self.digits):
            raise ValueError("word digits must be 0 or 1")

    @classmethod
    def parse(cls, text: str) -> "MapWord":
        return cls(tuple(int(c) for c in text))

    def __len__(self):
        return len(self.digits)

    def __str__(self):
        return "".join(map(str, self.digits))

    def then(self, other: "MapWord") -> "MapWord":
        """Apply ``self`` first, then ``other``."""
        return MapWord(self.digits + other.digits)

    def complement(self) -> "MapWord":
        return MapWord(tuple(1 - d for d in self.digits))

    def affine(self, ctx: BetaCtx) -> tuple[CertReal, CertReal]:
        """``(scale, offset)`` with ``word(x) = scale*x - offset``."""
        cache = ctx._cache.setdefault("affine", {})
        hit = cache.get(self.digits)
        if hit is None:
            scale, offset = CertReal(Fraction(1)), CertReal(Fraction(0))
            for d in self.digits:
                scale = scale * ctx.beta
                offset = offset * ctx.beta + d
            hit = cache[self.digits] = (scale, offset)
        return hit

    def apply(self, ctx: BetaCtx, x) -> CertReal:
        scale, offset = self.affine(ctx)
        return scale * CertReal.of(x) - offset

    def preimage(self, ctx: BetaCtx, y) -> CertReal:
        scale, offset = self.affine(ctx)
        return (CertReal.of(y) + offset) / scale


@dataclass(frozen=True)
class Itv:
    """Nonempty real interval with explicit endpoint flags.

    Operations that could produce the empty set return ``None`` instead.
    """

    lo: CertReal
    hi: CertReal
    lo_closed: bool = True
    hi_closed: bool = True

    @classmethod
    def make(cls, lo, hi, lo_closed=True, hi_closed=True) -> "Itv | None":
        lo, hi = CertReal.of(lo), CertReal.of(hi)
        c = lo.compare(hi)
        if c > 0 or (c == 0 and not (lo_closed and hi_closed)):
            return None
        return cls(lo, hi, lo_closed, hi_closed)

    @classmethod
    def closed(cls, lo, hi) -> "Itv":
        itv = cls.make(lo, hi)
        if itv is None:
            raise ValueError("empty closed interval")
        return itv

    @property
    def is_point(self) -> bool:
        return self.lo.compare(self.hi) == 0

    @property
    def length(self) -> CertReal:
        return self.hi - self.lo

    @property
    def midpoint(self) -> CertReal:
        return (self.lo + self.hi) / 2

    @property
    def key(self):
        if self.lo.key is None or self.hi.key is None:
            return None
        return (self.lo.key, self.hi.key, self.lo_closed, self.hi_closed)

    def contains(self, x) -> bool:
        x = CertReal.of(x)
        c_lo = x.compare(self.lo)
        if c_lo < 0 or (c_lo == 0 and not self.lo_closed):
            return False
        c_hi = x.compare(self.hi)
        return c_hi < 0 or (c_hi == 0 and self.hi_closed)

    def clip_above(self, c: CertReal, closed: bool) -> "Itv | None":
        """Intersection with ``(-inf, c]`` (``closed``) or ``(-inf, c)``."""
        cmp = self.hi.compare(c)
        if cmp < 0:
            return self
        if cmp == 0:
            return Itv.make(self.lo, self.hi, self.lo_closed, self.hi_closed and closed)
        return Itv.make(self.lo, c, self.lo_closed, closed)

    def clip_below(self, c: CertReal, closed: bool) -> "Itv | None":
        """Intersection with ``[c, inf)`` (``closed``) or ``(c, inf)``."""
        cmp = self.lo.compare(c)
        if cmp > 0:
            return self
        if cmp == 0:
            return Itv.make(self.lo, self.hi, self.lo_closed and closed, self.hi_closed)
        return Itv.make(c, self.hi, closed, self.hi_closed)

    def intersect(self, other: "Itv") -> "Itv | None":
        part = self.clip_below(other.lo, other.lo_closed)
        if part is None:
            return None
        return part.clip_above(other.hi, other.hi_closed)

    def map_affine(self, scale: CertReal, offset: CertReal) -> "Itv":
        """Image under ``x -> scale*x - offset`` (``scale > 0``)."""
        return Itv(scale * self.lo - offset, scale * self.hi - offset,
                   self.lo_closed, self.hi_closed)

    def pull_affine(self, scale: CertReal, offset: CertReal) -> "Itv":
        return Itv((self.lo + offset) / scale, (self.hi + offset) / scale,
                   self.lo_closed, self.hi_closed)

    def same_modulo_endpoints(self, other: "Itv") -> bool:
        return self.lo.compare(other.lo) == 0 and self.hi.compare(other.hi) == 0

    def as_floats(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)

    def __repr__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{float(self.lo):.10g}, {float(self.hi):.10g}{right}"


def switch_region(ctx: BetaCtx) -> Itv:
    return Itv(ctx.switch_lo, ctx.switch_hi, True, True)


def split_against_switch(ctx: BetaCtx, itv: Itv):
    """``(left, inside, right)`` parts of ``itv`` relative to the closed S."""
    left = itv.clip_above(ctx.switch_lo, False)
    right = itv.clip_below(ctx.switch_hi, False)
    inside = itv.clip_below(ctx.switch_lo, True)
    if inside is not None:
        inside = inside.clip_above(ctx.switch_hi, True)
    return left, inside, right


def is_full(ctx: BetaCtx, image: Itv) -> bool:
    """Image equals S modulo endpoints."""
    return (image.lo.compare(ctx.switch_lo) == 0
            and image.hi.compare(ctx.switch_hi) == 0)


# --------------------------------------------------------------------------
# Records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    """Maximal piece of S on which the return map is the affine map ``word``."""

    word: MapWord
    domain: Itv
    return_time: int
    image: Itv
    full: bool

    @property
    def degenerate(self) -> bool:
        return self.domain.is_point


@dataclass(frozen=True)
class ReturnRecord:
    start: CertReal
    end: CertReal
    time: int
    word: MapWord
    omega_digits_consumed: int


# --------------------------------------------------------------------------
# Pointwise return map
# --------------------------------------------------------------------------


def _require_switch(ctx: BetaCtx, x: CertReal) -> None:
    if not classify_point(ctx, x).in_switch:
        raise ValueError(f"{x!r} is not in the switch region")


def first_return(ctx: BetaCtx, omega: OmegaSource, idx: int, x,
                 cap: int = DEFAULT_RETURN_CAP) -> ReturnRecord:
    """Run K_beta from ``(omega shifted by idx, x)`` until it re-enters S."""
    x = CertReal.of(x)
    _require_switch(ctx, x)
    y, used = kbeta_step(ctx, omega, idx, x)
    digits = [omega.digit(idx)]
    consumed = int(used)
    for t in range(1, cap + 1):
        region = classify_point(ctx, y)
        if region.in_switch:
            return ReturnRecord(x, y, t, MapWord(tuple(digits)), consumed)
        if t == cap:
            break
        d = 0 if region is Region.LEFT_OF_S else 1
        y, used = kbeta_step(ctx, omega, idx + consumed, y)
        digits.append(d)
    raise NoReturnWithinCap(f"no return to S within {cap} steps from {x!r}", steps=cap)


def return_sequence(ctx: BetaCtx, omega: OmegaSource, x, count: int,
                    cap: int = DEFAULT_RETURN_CAP, idx: int = 0) -> list[ReturnRecord]:
    out: list[ReturnRecord] = []
    x = CertReal.of(x)
    for i in range(count):
        try:
            rec = first_return(ctx, omega, idx, x, cap)
        except NoReturnWithinCap as exc:
            raise NoReturnWithinCap(f"return {i + 1}: {exc}", index=i, steps=exc.steps) from None
        out.append(rec)
        idx += rec.omega_digits_consumed
        x = rec.end
    return out


# --------------------------------------------------------------------------
# Interval propagation
# --------------------------------------------------------------------------


@dataclass
class Piece:
    """A set of points whose current image is ``image``.

    ``count`` points-sets (branches of the same word length) share the image;
    ``word``/``scale``/``offset`` describe a representative, namely the one
    whose domain lies furthest to the left.
    """

    image: Itv
    word: tuple[int, ...]
    scale: CertReal
    offset: CertReal
    count: int = 1
    side: int = -1

    def domain(self) -> Itv:
        return self.image.pull_affine(self.scale, self.offset)

    def advance(self, ctx: BetaCtx, d: int) -> "Piece":
        beta = ctx.beta
        return Piece(self.image.map_affine(beta, CertReal(Fraction(d))), self.word + (d,),
                     self.scale * beta, self.offset * beta + d, self.count)

    def with_image(self, image: Itv, side: int = -1) -> "Piece":
        return Piece(image, self.word, self.scale, self.offset, self.count, side)


def start_piece(itv: Itv) -> Piece:
    return Piece(itv, (), CertReal(Fraction(1)), CertReal(Fraction(0)))


def merge_pieces(pieces: list[Piece]) -> list[Piece]:
    """Merge pieces with identical images (exact keys only).

    The representative kept is the one with the leftmost domain; counts add.
    """
    groups: dict = {}
    out: list[Piece] = []
    for p in pieces:
        key = (p.image.key, p.side) if p.image.key is not None else None
        if key is None:
            out.append(p)
            continue
        cur = groups.get(key)
        if cur is None:
            groups[key] = p
            out.append(p)
            continue
        total = cur.count + p.count
        if p.domain().lo.compare(cur.domain().lo) < 0:
            keep = Piece(p.image, p.word, p.scale, p.offset, total, p.side)
        else:
            keep = Piece(cur.image, cur.word, cur.scale, cur.offset, total, cur.side)
        out[out.index(cur)] = keep
        groups[key] = keep
    return out


def iter_returns(ctx: BetaCtx, start: Itv | Piece, first_digit: int, max_time: int,
                 merge: bool = False) -> Iterator[tuple[int, list[Piece], list[Piece]]]:
    """Yield ``(t, closing, alive)`` for t = 1, 2, ... up to ``max_time``.

    ``closing`` are the pieces landing in S exactly at step t; ``alive`` are
    the pieces still outside S (with ``side`` = the forced next digit).
    Iteration stops early once nothing is alive.
    """
    alive = [start if isinstance(start, Piece) else start_piece(start)]
    for t in range(1, max_time + 1):
        closing: list[Piece] = []
        nxt: list[Piece] = []
        for p in alive:
            moved = p.advance(ctx, first_digit if t == 1 else p.side)
            left, inside, right = split_against_switch(ctx, moved.image)
            if left is not None:
                nxt.append(moved.with_image(left, 0))
            if inside is not None:
                closing.append(moved.with_image(inside))
            if right is not None:
                nxt.append(moved.with_image(right, 1))
        if merge:
            closing = merge_pieces(closing)
            nxt = merge_pieces(nxt)
        alive = nxt
        yield t, closing, alive
        if not alive:
            return


def piece_branch(ctx: BetaCtx, p: Piece, time: int) -> Branch:
    return Branch(MapWord(p.word), p.domain(), time, p.image, is_full(ctx, p.image))


def enumerate_branches(ctx: BetaCtx, first_digit: int, max_time: int,
                       include_degenerate: bool = False) -> list[Branch]:
    """All branches of the return map with ``omega = (first_digit)^inf`` and
    return time at most ``max_time``, ordered by time then by position.

    Degenerate branches (single points such as {1/beta} for the golden
    ratio) are measure-zero and omitted unless ``include_degenerate``.
    """
    if max_time < 1:
        raise ValueError("max_time must be >= 1")
    key = ("branches", first_digit, max_time)
    cached = ctx._cache.get(key)
    if cached is None:
        cached = []
        for t, closing, _ in iter_returns(ctx, switch_region(ctx), first_digit, max_time):
            cached.extend(piece_branch(ctx, p, t) for p in closing)
        ctx._cache[key] = cached
    if include_degenerate:
        return list(cached)
    return [b for b in cached if not b.degenerate]


def branches_by_time(ctx: BetaCtx, first_digit: int, time: int) -> list[Branch]:
    """Branches (degenerate ones included) with exactly this return time."""
    return [b for b in enumerate_branches(ctx, first_digit, time, include_degenerate=True)
            if b.return_time == time]


def min_return_time(ctx: BetaCtx, cap: int = DEFAULT_RETURN_CAP) -> int:
    """Smallest attainable first-return time (any omega), degenerate branches included."""
    cached = ctx._cache.get("min_return_time")
    if cached is not None:
        return cached
    best = None
    for d in (0, 1):
        limit = cap if best is None else best
        for t, closing, _ in iter_returns(ctx, switch_region(ctx), d, limit, merge=True):
            if closing:
                best = t if best is None else min(best, t)
                break
    if best is None:
        raise NoReturnWithinCap(f"no branch closes within {cap} steps", steps=cap)
    ctx._cache["min_return_time"] = best
    return best


def graph_samples(ctx: BetaCtx, first_digit: int, max_time: int,
                  pts_per_branch: int) -> list[tuple[Branch, list[tuple[CertReal, CertReal]]]]:
    """Points on the graph of the return map, ``pts_per_branch`` per branch,
    evenly spaced and including both domain endpoints."""
    if pts_per_branch < 2:
        raise ValueError("pts_per_branch must be >= 2")
    out = []
    for b in enumerate_branches(ctx, first_digit, max_time):
        lo, width = b.domain.lo, b.domain.length
        pts = []
        for k in range(pts_per_branch):
            x = lo + width * Fraction(k, pts_per_branch - 1)
            pts.append((x, b.word.apply(ctx, x)))
        out.append((b, pts))
    return out
